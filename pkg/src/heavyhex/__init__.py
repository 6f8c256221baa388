"""Heavy-hex subsystem-code workbench: code construction, circuit-noise
simulation, matching and neural-network decoders, and benchmark tooling."""

from .code import HeavyHexCode, QubitId, Role, build_code, static_syndrome, stabilizer_count
from .noise import (
    FaultPattern,
    NoiseModel,
    device_model,
    sample_faults,
    single_source_model,
    uniform_model,
)
from .pauli import PauliFrame, PauliOperator, compose
from .schedule import MeasurementSchedule, build_schedule
from .sim import (
    Basis,
    BatchRecord,
    ShotRecord,
    compile_experiment,
    correction_succeeds,
    run_batch,
    run_memory,
    run_with_faults,
)

__all__ = [
    "Basis",
    "BatchRecord",
    "FaultPattern",
    "HeavyHexCode",
    "MeasurementSchedule",
    "NoiseModel",
    "PauliFrame",
    "PauliOperator",
    "QubitId",
    "Role",
    "ShotRecord",
    "build_code",
    "build_schedule",
    "compile_experiment",
    "compose",
    "correction_succeeds",
    "device_model",
    "run_batch",
    "run_memory",
    "run_with_faults",
    "sample_faults",
    "single_source_model",
    "stabilizer_count",
    "static_syndrome",
    "uniform_model",
]
