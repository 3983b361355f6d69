"""
Balíček pro modely: tržní data, prostředí baterie, prognózy, agenti a orákula.
"""
