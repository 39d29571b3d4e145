"""Vehicle parameter set: rigid body, hydrodynamic coefficients, propeller,
hull geometry and actuator limits.

Defaults describe a 30.5 kg torpedo-shaped research vehicle (REMUS-class
geometry).  All values are SI with radians; config files use the same field
names as the vehicle data sheets (``hydro.Z_uu_ds = -9.64`` style keys).

Two groups of defaults are calibrated rather than tabulated and are flagged
as such in the field comments:

* net buoyancy: ``B - W`` defaults to 0.340 kg * g.  The tabulated buoyancy
  (306 N) is inconsistent with the vehicle's documented 4-knot level flight;
  340 g reproduces it and is the nominal point of the buoyancy sweep.
* propeller polynomial and inflow constants: chosen so that at 1413 rpm the
  thrust balances axial drag at 2.0577 m/s, the shaft torque balances the
  roll hydrostatics at -2.594 deg, and the steady inflow is 1.29 m/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - py310 fallback
    import tomli as tomllib

from .errors import ConfigError

GRAVITY = 9.81          # m/s^2
KNOT = 0.51444          # m/s per knot
RHO_DEFAULT = 1030.0    # kg/m^3 seawater


@dataclass(frozen=True)
class RigidBodyParams:
    """Mass properties.  Origin is at the centre of buoyancy, z down."""

    m: float = 30.5                    # kg
    W: float = 30.5 * GRAVITY          # N
    B: float = 30.5 * GRAVITY + 0.340 * GRAVITY  # N, calibrated (see module docs)
    rho: float = RHO_DEFAULT           # kg/m^3
    cg: tuple = (0.0, 0.0, 0.0192)     # m, CG offset from origin
    cb: tuple = (0.0, 0.0, 0.0)        # m, CB offset from origin
    Ixx: float = 0.177                 # kg m^2
    Iyy: float = 3.45                  # kg m^2
    Izz: float = 3.45                  # kg m^2

    def validate(self):
        if not (self.m > 0 and self.rho > 0):
            raise ConfigError("mass and density must be positive")
        if not (self.Ixx > 0 and self.Iyy > 0 and self.Izz > 0):
            raise ConfigError("moments of inertia must be positive")


@dataclass(frozen=True)
class HydroCoefficients:
    """Hydrodynamic derivatives (data-sheet units).

    Added-mass diagonal entries are negative as tabulated; they enter the
    mass matrix with a sign flip.  Cross-flow coefficients (X_wq, M_uw, ...)
    are combined values: they already contain the added-mass (Munk) coupling
    plus body/fin lift.  ``K_roll`` has no tabulated value; the default is a
    calibration giving about 5 deg of differential fin at trim torque.
    """

    # added mass
    X_udot: float = -0.93     # kg
    Y_vdot: float = -35.5     # kg
    Y_rdot: float = 1.93      # kg m/rad
    Z_wdot: float = -35.5     # kg
    Z_qdot: float = -1.93     # kg m/rad
    K_pdot: float = -0.014    # kg m^2/rad
    M_wdot: float = -1.93     # kg m
    M_qdot: float = -4.88     # kg m^2/rad
    N_vdot: float = 1.93      # kg m
    N_rdot: float = -4.88     # kg m^2/rad
    # quadratic drag
    X_uu: float = -1.62       # kg/m
    Y_vv: float = -131.0      # kg/m
    Y_rr: float = 0.632       # kg m/rad^2
    Z_ww: float = -131.0      # kg/m
    Z_qq: float = -0.632      # kg m/rad^2
    K_pp: float = -0.001      # kg m^2/rad^2
    M_ww: float = 3.18        # kg
    M_qq: float = -9.4        # kg m^2/rad^2
    N_vv: float = -3.18       # kg
    N_rr: float = -9.4        # kg m^2/rad^2
    # body lift / cross terms (combined)
    X_wq: float = -35.5       # kg/rad
    X_qq: float = 1.93        # kg m/rad
    X_vr: float = 35.5        # kg/rad
    X_rr: float = -1.93       # kg m/rad
    Y_uv: float = -28.6       # kg/m
    Y_ur: float = 5.22        # kg/rad
    Y_wp: float = 35.5        # kg/rad
    Y_pq: float = 1.93        # kg m/rad
    Z_uw: float = -28.6       # kg/m
    Z_uq: float = -5.22       # kg/rad
    Z_vp: float = -35.5       # kg/rad
    Z_rp: float = 1.93        # kg/rad
    M_uw: float = 24.0        # kg
    M_uq: float = -2.0        # kg m/rad
    M_vp: float = -1.93       # kg m/rad
    M_rp: float = 4.86        # kg m^2/rad^2
    N_uv: float = -24.0       # kg
    N_ur: float = -2.0        # kg m/rad
    N_wp: float = -1.93       # kg m/rad
    N_pq: float = -4.86       # kg m^2/rad^2
    K_up: float = 0.0         # kg/rad, not tabulated
    # fin lift
    Y_uu_dr: float = 9.64     # kg/(m rad)
    Z_uu_ds: float = -9.64    # kg/(m rad)
    M_uu_ds: float = -6.15    # kg/rad
    N_uu_dr: float = -6.15    # kg/rad
    K_roll: float = -3.0      # N m/rad, calibrated (no tabulated value)


# Propeller polynomial calibration, see module docstring.  a1 reproduces the
# drag balance (1 - tau_p) * a1 * n^2 = 1.62 * U^2 at n = 1413/60 rps,
# U = 2.0577 m/s; b1 reproduces the trim roll angle -2.5941 deg.
_A1_CAL = 0.013742153564039109
_B1_CAL = -4.6881764447937813e-04


@dataclass(frozen=True)
class PropellerParams:
    """Propeller thrust/torque polynomials and two-state shaft model."""

    a1: float = _A1_CAL       # N/rps^2 thrust polynomial (calibrated)
    a2: float = 0.0           # N/rps
    a3: float = 0.0           # N
    b1: float = _B1_CAL       # N m/rps^2 hull reaction torque (calibrated)
    b2: float = 0.0           # N m/rps
    b3: float = 0.0           # N m
    J_m: float = 0.01         # kg m^2 shaft inertia
    m_f: float = 3.0          # kg mass of water in the control volume
    T_nn: float = _A1_CAL     # N/rps^2 two-state thrust coefficient
    Q_nn: float = -_B1_CAL    # N m/rps^2 shaft load torque coefficient (> 0)
    K_n: float = 0.005        # N m/rps linear shaft friction
    tau_p: float = 0.1        # thrust reduction factor
    a_p: float = 0.1          # axial flow parameter
    w_p: float = 0.41         # wake fraction (calibrated for 1.29 m/s inflow)
    n_max_rpm: float = 2500.0

    def validate(self):
        if self.J_m <= 0 or self.m_f <= 0:
            raise ConfigError("propeller J_m and m_f must be positive")
        if self.tau_p >= 1.0 or self.w_p >= 1.0:
            raise ConfigError("tau_p and w_p must be < 1")

    def inflow_damping(self, X_uu):
        """Return (d_f0, d_f) for the two-state inflow equation."""
        k = (1.0 - self.tau_p) * (1.0 + self.a_p)
        d_f0 = -2.0 * X_uu / (k * (1.0 - self.w_p))
        d_f = -X_uu / (k * (1.0 - self.w_p) ** 2)
        return d_f0, d_f


@dataclass(frozen=True)
class HullGeometry:
    """Myring hull profile parameters.  Lengths in m, angle in rad."""

    a: float = 0.191          # nose section length
    a_offset: float = 0.0165  # truncated nose length
    b: float = 0.654          # mid-body length
    c: float = 0.541          # tail section length
    c_offset: float = 0.0368  # truncated tail length (stored, unused by r(xi))
    n_exp: float = 2.0        # nose shape exponent
    theta_tail: float = 0.436 # included tail half-angle, rad (data-sheet units)
    d: float = 0.191          # max hull diameter
    l: float = 1.33           # total vehicle length

    @property
    def l_f(self):
        """Forward body length a + b - a_offset (nose + mid section)."""
        return self.a + self.b - self.a_offset

    def validate(self):
        if min(self.a, self.b, self.c, self.d, self.l) <= 0:
            raise ConfigError("hull lengths must be positive")
        if not self.l_f < self.l:
            raise ConfigError("hull: forward length must be shorter than total length")


@dataclass(frozen=True)
class Limits:
    """Actuator and validity limits."""

    fin_max: float = 0.35         # rad per fin
    theta_ref_max: float = 0.35   # rad, pitch command saturation
    speed_max: float = 5.0        # m/s validity bound on |nu_linear|
    euler_guard: float = 1e-3     # rad margin before the pitch singularity


@dataclass(frozen=True)
class VehicleParams:
    rb: RigidBodyParams = field(default_factory=RigidBodyParams)
    hydro: HydroCoefficients = field(default_factory=HydroCoefficients)
    prop: PropellerParams = field(default_factory=PropellerParams)
    hull: HullGeometry = field(default_factory=HullGeometry)
    limits: Limits = field(default_factory=Limits)

    def validate(self):
        self.rb.validate()
        self.prop.validate()
        self.hull.validate()
        return self


HYDRO_NAMES = tuple(f.name for f in fields(HydroCoefficients))

# config sections -> dataclass plumbing -------------------------------------

_BODY_KEYS = {
    "m": ("m",), "W": ("W",), "B": ("B",), "rho": ("rho",),
    "x_g": ("cg", 0), "y_g": ("cg", 1), "z_g": ("cg", 2),
    "x_b": ("cb", 0), "y_b": ("cb", 1), "z_b": ("cb", 2),
    "Ixx": ("Ixx",), "Iyy": ("Iyy",), "Izz": ("Izz",),
}
_HULL_KEYS = ("a", "a_offset", "b", "c", "c_offset", "n_exp", "theta_tail", "d", "l")
_PROP_KEYS = ("a1", "a2", "a3", "b1", "b2", "b3", "J_m", "m_f", "T_nn", "Q_nn",
              "K_n", "tau_p", "a_p", "w_p", "n_max_rpm")
_LIMIT_KEYS = {"fin_max_deg": "fin_max", "theta_ref_max_deg": "theta_ref_max",
               "speed_max": "speed_max", "euler_guard": "euler_guard"}


def _require_number(section, key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("expected a number", key=f"{section}.{key}")
    return float(value)


def params_from_mapping(data, base=None):
    """Build VehicleParams from a nested mapping (parsed config file).

    Unknown sections or keys raise ConfigError naming the offending path;
    missing keys keep the documented defaults.
    """
    p = base if base is not None else VehicleParams()
    known = {"body", "hull", "hydro", "prop", "limits"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")

    body = dict(data.get("body", {}))
    if body:
        cg = list(p.rb.cg)
        cb = list(p.rb.cb)
        kw = {}
        for key, value in body.items():
            if key not in _BODY_KEYS:
                raise ConfigError("unknown key", key=f"body.{key}")
            value = _require_number("body", key, value)
            target = _BODY_KEYS[key]
            if target[0] == "cg":
                cg[target[1]] = value
            elif target[0] == "cb":
                cb[target[1]] = value
            else:
                kw[target[0]] = value
        rb = replace(p.rb, cg=tuple(cg), cb=tuple(cb), **kw)
        p = replace(p, rb=rb)

    hull = dict(data.get("hull", {}))
    if hull:
        kw = {}
        for key, value in hull.items():
            if key == "l_f":
                # derived via Eq. l_f = a + b - a_offset; accept if consistent
                continue
            if key not in _HULL_KEYS:
                raise ConfigError("unknown key", key=f"hull.{key}")
            kw[key] = _require_number("hull", key, value)
        hg = replace(p.hull, **kw)
        if "l_f" in hull:
            stated = _require_number("hull", "l_f", hull["l_f"])
            if abs(stated - hg.l_f) > 1e-3:
                raise ConfigError(
                    f"hull.l_f={stated} inconsistent with a + b - a_offset = {hg.l_f:.4f}")
        p = replace(p, hull=hg)

    hydro = dict(data.get("hydro", {}))
    if hydro:
        kw = {}
        for key, value in hydro.items():
            if key not in HYDRO_NAMES:
                raise ConfigError("unknown key", key=f"hydro.{key}")
            kw[key] = _require_number("hydro", key, value)
        p = replace(p, hydro=replace(p.hydro, **kw))

    prop = dict(data.get("prop", {}))
    if prop:
        kw = {}
        for key, value in prop.items():
            if key not in _PROP_KEYS:
                raise ConfigError("unknown key", key=f"prop.{key}")
            kw[key] = _require_number("prop", key, value)
        p = replace(p, prop=replace(p.prop, **kw))

    limits = dict(data.get("limits", {}))
    if limits:
        kw = {}
        for key, value in limits.items():
            if key not in _LIMIT_KEYS:
                raise ConfigError("unknown key", key=f"limits.{key}")
            value = _require_number("limits", key, value)
            if key.endswith("_deg"):
                value = math.radians(value)
            kw[_LIMIT_KEYS[key]] = value
        p = replace(p, limits=replace(p.limits, **kw))

    return p.validate()


def load_params(path, base=None):
    """Load VehicleParams from a TOML config file."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return params_from_mapping(data, base=base)


def params_to_mapping(p):
    """Flatten VehicleParams back to the config-file mapping (for manifests)."""
    body = {"m": p.rb.m, "W": p.rb.W, "B": p.rb.B, "rho": p.rb.rho,
            "x_g": p.rb.cg[0], "y_g": p.rb.cg[1], "z_g": p.rb.cg[2],
            "x_b": p.rb.cb[0], "y_b": p.rb.cb[1], "z_b": p.rb.cb[2],
            "Ixx": p.rb.Ixx, "Iyy": p.rb.Iyy, "Izz": p.rb.Izz}
    hull = {k: getattr(p.hull, k) for k in _HULL_KEYS}
    hydro = {k: getattr(p.hydro, k) for k in HYDRO_NAMES}
    prop = {k: getattr(p.prop, k) for k in _PROP_KEYS}
    limits = {"fin_max_deg": math.degrees(p.limits.fin_max),
              "theta_ref_max_deg": math.degrees(p.limits.theta_ref_max),
              "speed_max": p.limits.speed_max,
              "euler_guard": p.limits.euler_guard}
    return {"body": body, "hull": hull, "hydro": hydro, "prop": prop,
            "limits": limits}


def perturb_params(params, multipliers=None, cg_shift=None, buoyancy_delta=0.0):
    """Return a copy of ``params`` with named coefficients scaled, the CG
    translated and the buoyancy adjusted.  The original is untouched.

    ``multipliers`` maps hydrodynamic coefficient names (data-sheet spelling,
    e.g. ``X_uu``) to positive scale factors.  Unknown names raise
    ConfigError listing the valid ones.
    """
    p = params
    if multipliers:
        kw = {}
        for name, factor in multipliers.items():
            if name not in HYDRO_NAMES:
                raise ConfigError(
                    f"unknown coefficient {name!r}; valid names: {', '.join(HYDRO_NAMES)}")
            factor = float(factor)
            if not factor > 0:
                raise ConfigError(f"multiplier for {name} must be > 0")
            kw[name] = getattr(p.hydro, name) * factor
        p = replace(p, hydro=replace(p.hydro, **kw))
    if cg_shift is not None:
        dx, dy, dz = (float(v) for v in cg_shift)
        cg = (p.rb.cg[0] + dx, p.rb.cg[1] + dy, p.rb.cg[2] + dz)
        p = replace(p, rb=replace(p.rb, cg=cg))
    if buoyancy_delta:
        p = replace(p, rb=replace(p.rb, B=p.rb.B + float(buoyancy_delta)))
    return p
