"""
Balíček pomocných utilit: konfigurace, CSV, JSON a výjimky.
"""
