"""
Balíček controllerů: podpříkazy, běhy experimentů a porovnání výsledků.
"""
