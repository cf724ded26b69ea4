# Error measurement, convergence rates and figures
