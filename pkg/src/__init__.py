# Burn-in bounds for Gibbs samplers on the one-way random effects model
__version__ = "1.0.0"
