"""Simulator of a two-photon, four-qubit path-polarization chip experiment."""

from .modes import Arm, ModeLabel, Pol, Spatial
from .states import MixedState, StageError, TwoPhotonState
from .elements import (ModeUnitary, apply, apply_all, beam_splitter,
                       phase_plate, pol_rotation, spatial_swap, waveplate)
from .wavepacket import WavepacketConfig, coherence_sigma_from_filter, temporal_overlap
from .detection import DetectorSpec, coincidence_probability
from .source import (CompensationSetting, EfficiencyTable, SourceConfig,
                     apply_compensation, emit_cluster, emit_hyperentangled)
from .scans import (ExperimentRecord, ScanResult, apply_efficiencies, he_scan,
                    hom_scan, path_scan)
from .tomography import (DensityMatrix2Q, TomographySetting, bell_state,
                         concurrence, fidelity, monte_carlo_errors, reconstruct,
                         simulate_counts, sixteen_settings)
from .witness import (StabilizerSpec, WitnessReport, measure_stabilizer,
                      measure_witness, witness)
from .grover import GroverResult, GroverRun, box_cluster, protocol_rate, run_grover

__version__ = "0.1.0"
