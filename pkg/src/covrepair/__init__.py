"""Covariance-matrix physicality repair and multimode entanglement certification.

The toolkit recovers the most probable physical covariance matrix from an
error-contaminated measured one (a weighted minimax semidefinite program)
and certifies multimode entanglement of the result with statistical
confidence levels, including genuine multipartite entanglement from
matrix-pair witnesses.
"""
from .core import (
    Bipartition,
    CovarianceMatrix,
    PhysicalityReport,
    SigmaMatrix,
    general_variance_test,
    partial_transpose,
    physicality_defect,
    physicality_test_matrix,
    symplectic_form,
    weak_physicality_defect,
)
from .dataio import Dataset, DatasetError, load, load_bundled, save
from .entanglement import (
    BipartitionVerdict,
    DegenerateSigmaError,
    WitnessVector,
    confidence,
    enumerate_bipartitions,
    extract_witness,
    ppt_matrix,
    scan,
)
from .gme import (
    GmeVerdict,
    InvalidWitnessError,
    MatrixWitness,
    certifies,
    evaluate,
    trace_sqrt_pair,
    witness_expectation,
    witness_sigma,
)
from .repair import (
    DeviationReport,
    RepairResult,
    SolverFailure,
    assemble,
    baseline_shift,
    deviation_report,
    repair,
)
from .sdp import DenseBlock, DiagBlock, FeasibilityReport, LmiProblem, SdpSolution, solve, verify

__version__ = "0.1.0"

__all__ = [
    "Bipartition",
    "BipartitionVerdict",
    "CovarianceMatrix",
    "Dataset",
    "DatasetError",
    "DegenerateSigmaError",
    "DenseBlock",
    "DeviationReport",
    "DiagBlock",
    "FeasibilityReport",
    "GmeVerdict",
    "InvalidWitnessError",
    "LmiProblem",
    "MatrixWitness",
    "PhysicalityReport",
    "RepairResult",
    "SdpSolution",
    "SigmaMatrix",
    "SolverFailure",
    "WitnessVector",
    "assemble",
    "baseline_shift",
    "certifies",
    "confidence",
    "deviation_report",
    "enumerate_bipartitions",
    "evaluate",
    "extract_witness",
    "general_variance_test",
    "load",
    "load_bundled",
    "partial_transpose",
    "physicality_defect",
    "physicality_test_matrix",
    "ppt_matrix",
    "repair",
    "save",
    "scan",
    "solve",
    "symplectic_form",
    "trace_sqrt_pair",
    "verify",
    "weak_physicality_defect",
    "witness_expectation",
    "witness_sigma",
]
