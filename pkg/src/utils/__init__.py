# Logging setup, file helpers and exceptions
