"""
Balíček pro textové výstupy do konzole.
"""
