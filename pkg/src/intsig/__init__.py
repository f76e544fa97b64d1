"""Integral invariants, signatures and matching for planar and space curves."""

from .curves import (
    AffineMap,
    Curve,
    NoiseSpec,
    add_noise,
    apply_affine,
    generate_example,
    load_curve,
    random_affine,
    reparameterize,
    resample_arclength,
    save_curve,
    shift_start,
)
from .errors import CurveInputError, DegenerateGeometryError, ParseError, PartitionError, VerificationError
from .invariants2d import InvariantTrace, invariants_2d
from .invariants3d import invariants_3d
from .matching import ClassificationReport, global_signature_distance, local_signature_distance, nn_classify
from .potentials import MultiIndex, PotentialTable, count_independent, potential_table
from .signatures import LocalSignature, Partition, SignatureCurve, equi_affine_partition, global_signature, local_signature

__all__ = [
    "AffineMap", "ClassificationReport", "Curve", "CurveInputError", "DegenerateGeometryError", "InvariantTrace",
    "LocalSignature", "MultiIndex", "NoiseSpec", "ParseError", "Partition", "PartitionError", "PotentialTable",
    "SignatureCurve", "VerificationError", "add_noise", "apply_affine", "count_independent", "equi_affine_partition",
    "generate_example", "global_signature", "global_signature_distance", "invariants_2d", "invariants_3d",
    "load_curve", "local_signature", "local_signature_distance", "nn_classify", "potential_table", "random_affine",
    "reparameterize", "resample_arclength", "save_curve", "shift_start",
]
