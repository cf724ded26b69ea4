# Benchmark problems and reference solutions
