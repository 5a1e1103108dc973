"""
Geometry of the neutral space R^{2,2} and of oriented line space
"""
