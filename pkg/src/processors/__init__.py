# Result tables and field dumps
