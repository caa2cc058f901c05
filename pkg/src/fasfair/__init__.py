"""Outage analysis and min-max fair resource allocation for two-user
fluid-antenna downlinks under NOMA and OMA (TDMA)."""

from .model import (FasSide, NomaDesign, OmaDesign, Regime, Scenario, SystemParams,
                    correlation_mu, dbm_to_mw, gamma_thresholds, noma_design, oma_design)
from .outage import (OutagePair, best_port_outage, noma_outage_approx, noma_outage_cu,
                     noma_outage_cu_phi1, noma_outage_cu_phi2, noma_outage_eu,
                     noma_outage_pair, oma_outage, oma_outage_approx, oma_outage_pair)
from .specfun import QuadratureSpec

__version__ = "0.1.0"
