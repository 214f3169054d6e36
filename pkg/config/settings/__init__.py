# base.py con los valores por defecto; development.py y production.py los ajustan
