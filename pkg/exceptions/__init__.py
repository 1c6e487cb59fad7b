"""
Exceptions package for the CDFM forecasting toolkit.
"""
