"""Shared helpers for the solvers and the experiment harness."""
