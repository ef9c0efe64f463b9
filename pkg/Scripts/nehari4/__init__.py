"""
nehari4 - Nehari-manifold and mountain-pass toolkit for fourth-order equations
"""
__version__ = "1.0.0"
