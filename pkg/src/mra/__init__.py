# Multiresolution bookkeeping package
