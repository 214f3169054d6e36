# Una app de Django por etapa: compilador, simulador, fallos y harness
