"""Package for computing resonances of even asymptotically hyperbolic spaces.

Release markers:
X.Y
X.Y.Z for bug fixes
"""

__version__ = '0.1'
