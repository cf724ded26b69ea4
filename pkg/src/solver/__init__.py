# LDG discretization, adaptivity and time stepping
