"""Shared analytic constants.

Everything here is a closed form; kernels receive these values as parameters
so both backends compute with the exact same doubles.
"""
import math

# log step of the branch-value walk: E[ln xi] = ln sqrt(2)
LOG_SQRT2 = 0.5 * math.log(2.0)

# strip half-ish geometry: the imaginary part lives in (0, STRIP_WIDTH)
STRIP_WIDTH = math.pi / 2.0
STRIP_CENTER = math.pi / 4.0

# first exit of standard BM from [0, pi/2] started at pi/4
EXIT_MEAN = STRIP_CENTER ** 2                  # (pi/4)^2
EXIT_VAR = math.pi ** 4 / 384.0

# renewal rate of strip jumps and the log drift it produces
JUMP_RATE = 1.0 / EXIT_MEAN                    # (pi/4)^-2
KAPPA = JUMP_RATE * LOG_SQRT2                  # (4/pi)^2 * ln sqrt(2) ~ 0.561844

# uniform draws are floored here before ndtri; below this the inverse normal
# would be -inf and 0*inf would poison degenerate (sd=0) gaussians
UNIFORM_FLOOR = 1e-300

# bridge-crossing probabilities below this are treated as zero (double floor)
UNDERFLOW_FLOOR = 1e-300

# deterministic refinement trigger: a step refines when its bridge crossing
# probability exceeds this, i.e. 2*x0*x1/dt < -ln(COIN_FLOOR)
COIN_FLOOR = 1e-12
