"""
Secure CWPCN

Resource allocation engine for cooperative cognitive wireless-powered
networks. Secondary users harvest energy from a hybrid access point, then
jam eavesdroppers of a primary link and transmit their own data, in exchange
for access to the primary spectrum. Scheduling, power and time allocation
maximize the secondary ergodic rate under a primary secrecy-outage
constraint.
"""

__version__ = "0.1.0"
