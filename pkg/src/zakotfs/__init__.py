"""Zak-OTFS delay-Doppler signal processing with Zadoff-Chu spread pilots.

Discrete Zak transforms, twisted convolution, spread pilots (Zadoff-Chu and
quadratic chirp), ambiguity functions, doubly-dispersive channel simulation,
joint sensing/data receivers and grant-free preamble detection.
"""
from .grid import DDGrid, DDSignal, TDSignal
from .transforms import (TwistedOperator, inverse_zak_transform, papr, spread_point_pilot,
                         twisted_compose, twisted_convolve, zak_transform)
from .pilots import (ChirpPilot, PointPilot, ZCPilot, chirp_filter, chirp_pilot_signal,
                     chirp_self_ambiguity_support, data_frame_signal, gauss_sum_magnitude,
                     point_pilot_signal, zc_dd_signal, zc_pilot_signal, zc_sequence,
                     zc_self_ambiguity_support)
from .ambiguity import AmbiguityMap, ambiguity_patch, cross_ambiguity, self_ambiguity
from .filters import PulseShapingFilter, rrc_pulse, sqrt_rc_window, synthesize_waveform
from .channel import (VEH_A_DELAYS, VEH_A_POWERS_DB, VEH_A_TAU_MAX, ChannelPath,
                      CrystallizationReport, EffectiveChannel, PhysicalChannel,
                      apply_channel, build_io_matrix, check_crystallization, draw_veh_a,
                      effective_channel)
from .receiver import (ChannelEstimate, CrystallizationError, FramePlan, ReadoffRegion,
                       ber, cancel_pilot, default_readoff_region, estimate_channel,
                       lmmse_detect, nmse, pilot_signal, qam4_decide, qam4_random,
                       transmit_frame, turbo_iterate)
from .rach import (AccessTrial, DelayDopplerSets, ObservationMatrix,
                   build_observation_matrix, crossamb_detect, missed_detection_curve,
                   ost_detect, simulate_access_trial)
from .experiments import ber_curve, ber_trial, common_region, make_pilot, nmse_curve, nmse_trial

__version__ = "0.1.0"
