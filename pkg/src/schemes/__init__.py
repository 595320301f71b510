"""
Link schemes over the UCA channel: OAM transforms, BePre, detection, capacity.
"""
