"""
QRef - Configuration
Tolerances and defaults shared by the library and the CLI.

Nothing here is read from the environment or from files; a run is
configured by its command-line flags (see main.py).
"""

TOOL_NAME = "qref"
VERSION   = "1.0.0"

# ── Linear-algebra tolerances ─────────────────────────────
STATE_NORM_TOL         = 1e-12   # |‖ψ‖ - 1|
HERMITIAN_TOL          = 1e-12   # density operators
DENSITY_TRACE_TOL      = 1e-12
DENSITY_POSITIVITY_TOL = 1e-12   # eigenvalues may dip to -tol
EIGEN_HERMITIAN_TOL    = 1e-10   # input to hermitian_eigensystem
EIGEN_DEGENERACY_GAP   = 1e-9    # relative gap between neighbours
PROJECTOR_TOL          = 1e-10   # P² = P, Σπ = 1
ZERO_EIGENVALUE        = 1e-12   # branches below this are dropped
PROPERTY_TOL           = 1e-12   # structural identities in the verify suite
RECONSTRUCTION_TOL     = 1e-10   # ‖op - Σλ|e⟩⟨e|‖_max

# ── Hardy scenario ────────────────────────────────────────
ALPHA_BETA_GAP = 1e-9
CHECK_TOL      = 1e-10           # closed form vs full-state simulation
SIGN_GUARD     = 1e-12           # guard band for the sign dichotomy
LOCALITY_TOL   = 1e-12           # marginal of one device vs the partner setting
DEVICE_DIM     = 3               # ready pointer m0 plus two results

# ── CLI defaults ──────────────────────────────────────────
DEFAULT_ALPHA      = 0.8
CLI_ALPHA_GAP      = 1e-8   # α typed to 8 decimals cannot resolve α = β more finely
DEFAULT_GRID_MIN   = 0.02
DEFAULT_GRID_MAX   = 0.98
DEFAULT_GRID_STEPS = 97
SIGNIFICANT_DIGITS = 12
