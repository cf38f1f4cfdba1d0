"""
Test package for the secure-cwpcn engine.
"""
