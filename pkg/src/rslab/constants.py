"""Frozen numerical conventions.

Every slack factor, threshold and calibrated constant used to turn an
asymptotic statement into a finite check lives here, so that changing one is a
visible, single-line edit.
"""

# Slack factor for "A ≍ B": B/SLACK <= A <= SLACK*B.
ASYMP_SLACK = 8.0

# "Negligibly small" at desk scale, relative to the natural size of the object.
NEGLIGIBLE_REL = 1e-8

# Inert-family constants C_j for j <= 3.
INERT_CONSTANTS = (10.0, 10.0, 10.0, 10.0)

# Oscillatory quadrature.
QUAD_REL_TOL = 1e-10
QUAD_NODES_PER_CYCLE = 10
QUAD_MAX_PANELS = 200_000

# Stationary phase: root finding tolerance relative to Y/Z.
STATIONARY_ROOT_TOL = 1e-12
# Leading-term relative error must be <= STATIONARY_ERROR_CONSTANT / Y.
STATIONARY_ERROR_CONSTANT = 5.0

# Poisson summation truncation.
POISSON_NEGLIGIBLE = 1e-14

# Second derivative test for the medium-L xi-integral: |I| <= C / sqrt(RM).
XI_INTEGRAL_CONSTANT = 10.0

# Empirical constant in the twisted GL(3) sum bound T^{3/10} N^{3/4}.
LEMMA3_CONSTANT = 100.0

# Constant for the regime bounds of the bilinear sum.
BILINEAR_CONSTANT = 100.0

# Partial sums of A(1,n)^2 are compared against C * N^{RS3_EXPONENT}.
# Calibrated on n <= 2^20: the ratio peaks at N = 1 (value 1) and is 0.22 at
# the top of the table.
RS3_EXPONENT = 1.05
RS3_CONSTANT = 1.0

# Convolution identities between derived coefficient arrays.
CONVOLUTION_REL_TOL = 1e-9

# Derived dual-frequency window [T/(8L), 8T/L].
DUAL_RANGE_FACTOR = 8.0
