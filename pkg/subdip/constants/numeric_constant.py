"""
Numerical defaults shared by the optimisers and the harness
"""

# natural gradient descent
NGD_BETA = 0.95
NGD_LAMBDA_INIT = 100.0
NGD_LAMBDA_MAX = 100.0
NGD_LAMBDA_MIN_SMALL = 1e-8
NGD_LAMBDA_MIN_LARGE = 1.0
NGD_S_MIN_SMALL = 1e-3
NGD_S_MIN_LARGE = 5e-6
NGD_RHO_PERIOD = 5
NGD_N_PROBES_SMALL = 100
NGD_N_PROBES_LARGE = 50
NGD_ADAPT_FACTOR = 0.75

# rho thresholds: (lower, upper) dead zones
DAMPING_RHO_BOUNDS = (0.25, 0.75)
SCALING_RHO_BOUNDS = (0.95, 1.05)

# singular threshold of the momentum 2x2 system
MOMENTUM_SINGULAR_TOL = 1e-12

# L-BFGS
LBFGS_HISTORY = 10
LBFGS_C1 = 1e-4
LBFGS_C2 = 0.9
LBFGS_CURVATURE_EPS = 1e-10

# Adam
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8
ADAM_LR_DIP = 1e-4
ADAM_LR_EDIP = 3e-5
ADAM_LR_SUBDIP = 1e-3

# early stopping
LOSS_STOP_DELTA = 0.995
LOSS_STOP_PATIENCE = 100
VARIANCE_STOP_DELTA = 1.0
VARIANCE_STOP_PATIENCE = 1000
VARIANCE_WINDOW = 100

# total variation weights
TV_WEIGHT_CT = 3e-5
TV_WEIGHT_RESTORATION = 0.0
