# Proyecto Django de la cadena de herramientas de resiliencia
