# Alpert and interpolatory multiwavelet bases
