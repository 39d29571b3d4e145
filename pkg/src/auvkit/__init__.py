"""auvkit: 6-DOF torpedo-AUV dynamics, level-flight trim, linear subsystem
models, and closed-loop control scenarios with disturbance/robustness
evaluation."""

from .params import (HullGeometry, HydroCoefficients, Limits, PropellerParams,
                     RigidBodyParams, VehicleParams, load_params,
                     perturb_params, KNOT)
from .state import ActuatorCommand, OceanCurrent, VehicleState, Wrench
from .hull import hull_profile, myring_radius
from .kinematics import euler_rates, wrap_angle
from .dynamics import (VehicleModel, actuator_wrench, coriolis_added,
                       coriolis_matrix, coriolis_rb, damping_matrix,
                       hydrostatic_wrench, mass_matrix,
                       ocean_current_body_velocity, ocean_current_step,
                       propeller_thrust_torque, propeller_two_state_derivatives,
                       state_derivative)
from .trim import TrimDecision, TrimResult, reduced_trim_equations, solve_trim, trim_residual
from .linearize import (StateSpaceModel, TransferFunction, depth_pitch_model,
                        depth_transfer_functions, full_jacobian,
                        reduced_jacobian, speed_model, yaw_model)
from .control import (CascadedController, ControlConfig, PdGains, SmcParams,
                      allocate_roll, depth_outer, pitch_inner, smc_inner,
                      speed_control, yaw_inner, yaw_outer)
from .sim import (LawnMowingPattern, Metrics, Scenario, TimeSeriesLog,
                  integrate_step, lawn_mowing_reference, rmse, run_scenario)

__all__ = [name for name in dir() if not name.startswith("_")]
