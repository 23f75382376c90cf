"""Global measure and coupling constants, fixed once and frozen.

Orientation: z = s + i t, so dz ^ dzbar = -2i ds ^ dt.  Every 2-form density
written against dz ^ dzbar is reduced to ds dt with DZ_DZBAR before summing.

Dirac coupling.  The Grassmann-valued action is written here as

    A1 = 1/2 int dvol |dphi|^2 - eta1 eta2 int dvol g(xi, tau)
         + DIRAC_COEFF * int dvol B(psi, Dslash psi).

The literal prefactor of the Dirac term is 1/2 * (-2i) = -i (LITERAL_DIRAC_COEFF).
Matching the superspace Lagrangian -i dz^dzbar d_theta+ d_theta- g(D+ Phi, D- Phi)
against A1 in the calibration case

    flat target, lambda = 1, unit torus, xi = 0,
    psi1 = exp(-2 pi i s) v,  psi2 = exp(2 pi i s) w,

gives int q ds dt = 2 pi i g(v, w) with q = g(psi1, d_zbar psi2) - g(psi2, d_zbar psi1).
The Lagrangian route yields -2 int q = -4 pi i g(v, w); int dvol B(psi, Dslash psi)
equals 2 int q = 4 pi i g(v, w).  Hence DIRAC_COEFF = -1.  The ratio
DIRAC_COEFF / LITERAL_DIRAC_COEFF = -i is exactly the ratio between
dz ^ dzbar = -2i ds dt and the identification dz ^ dzbar = 2 lambda^{-1} dvol = 2 ds dt.
See ``action.calibrate_dirac_coefficient`` for the executable version.
"""

DZ_DZBAR = -2j                 # dz ^ dzbar in units of ds ^ dt
LAGRANGIAN_PREFACTOR = -1j     # L = -i dz^dzbar d_theta+ d_theta- (...)
LITERAL_DIRAC_COEFF = -1j      # 1/2 * (-2i) in the literal form
DIRAC_COEFF = -1.0             # calibrated value, see module docstring

# reduced constant: int L = MEASURE * int d_theta+ d_theta- (...) ds dt
LAGRANGIAN_MEASURE = LAGRANGIAN_PREFACTOR * DZ_DZBAR   # = -2
