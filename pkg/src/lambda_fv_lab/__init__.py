"""Simulation and diagnostics toolkit for Lambda-coalescents and
lookdown-constructed Fleming-Viot supports."""

from .cdi import (BlockChainRates, CdiMethod, CdiVerdict, ConditionReport,
                  TmEstimate, UrnReport, Verdict, block_chain_rates,
                  cdi_gamma_series, cdi_psi_integral, check_condition_A,
                  default_gamma_levels, default_psi_grid, estimate_Tm, psi,
                  urn_dominance_check)
from .coalescent import (BlockCountPath, CoalescentEvent, CoalescentPath,
                         OrderedPartition, RateTable, block_count_path,
                         build_rate_table, decrease_rate, log_binom,
                         path_rows, restrict, simulate_coalescent,
                         total_rate)
from .errors import (AllCensored, AtomAtOne, ConfigError, DegenerateCloud,
                     DegenerateRatesWarning, DivisionNearZero, DomainError,
                     GridTooCoarse, IoError, OutOfRange,
                     QuadratureDivergence, RateOverflow, SingularEndpoint,
                     ToolkitError, WrongInitialization)
from .harness import (KINDS, TOOLKIT_VERSION, ExperimentConfig, RunManifest,
                      replicate_seed, run_experiment, write_csv)
from .harness_streams import ROLES, stream_for
from .lookdown import (BirthEvent, Lineage, LookdownTrajectory,
                       RecoveredPartitionPath, dislocation,
                       empirical_support, event_rows, genealogy,
                       range_union, rate_row, recovered_coalescent,
                       simulate_lookdown, snapshot_rows)
from .measures import (DEFAULT_TOL, Family, LambdaMeasure, beta_measure,
                       custom, from_table, kingman, moment_integral,
                       total_mass, uniform)
from .support import (DimensionEstimate, GrowthReport, MassReport,
                      ModulusReport, PointCloud, RadiusReport,
                      box_counting_dimension, brownian_sup_tail_mc,
                      brownian_tail_bound, local_mass_profile,
                      modulus_envelope, modulus_h, radius_profile,
                      support_growth_check, theory_constant)

__version__ = TOOLKIT_VERSION
