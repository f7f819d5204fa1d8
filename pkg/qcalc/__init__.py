from qcalc.version import VERSION

__version__ = VERSION
