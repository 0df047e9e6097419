"""Private information retrieval from Reed-Solomon coded storage.

Tolerates t colluding, b byzantine and r unresponsive servers whenever
n > k + t + 2b + r - 1, at rate (n - r - (k + t + 2b - 1)) / (n - r).
"""

from .adversary import AdversarySpec, Placement, Strategy, corrupt_round
from .galois import GF, FieldElement, Polynomial, poly_eval, poly_interpolate
from .protocol import (
    InfeasibleParameters,
    QueryRound,
    RetrievalSession,
    RoundFailure,
    SchemeParams,
    build_query_round,
    compute_params,
    decode_round,
    monomial_term,
    reconstruct_file,
    server_response,
    symmetric_mask,
)
from .reed_solomon import ERASURE, DecodeFailure, RsCode, rs_decode_errors_erasures, rs_encode
from .simulation import ExperimentResult, build_system, run_retrieval, sweep
from .storage import FileMatrix, StorageSystem, encode_system

__all__ = [
    "AdversarySpec", "Placement", "Strategy", "corrupt_round",
    "GF", "FieldElement", "Polynomial", "poly_eval", "poly_interpolate",
    "InfeasibleParameters", "QueryRound", "RetrievalSession", "RoundFailure", "SchemeParams",
    "build_query_round", "compute_params", "decode_round", "monomial_term", "reconstruct_file",
    "server_response", "symmetric_mask",
    "ERASURE", "DecodeFailure", "RsCode", "rs_decode_errors_erasures", "rs_encode",
    "ExperimentResult", "build_system", "run_retrieval", "sweep",
    "FileMatrix", "StorageSystem", "encode_system",
]
