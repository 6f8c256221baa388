import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

ARTIFACTS = Path(__file__).parent / "_artifacts"

# Final decoder training configuration (deterministic; cached on disk so
# repeated acceptance runs skip the ~15 minutes of training).
TRAIN_SPECS = {
    3: dict(count=1_200_000, epochs=25, lr=1e-3, lr_decay=0.97, seed=301),
    5: dict(count=2_000_000, epochs=25, lr=1e-3, lr_decay=0.95, seed=501),
}
TRAIN_P = 1e-3
TRAIN_BASIS = "memx"


def train_or_load(d: int):
    from heavyhex import build_code, uniform_model
    from heavyhex.ann import (
        TrainConfig,
        collect_dataset,
        init_mlp,
        load_mlp,
        save_mlp,
        train,
    )

    spec = TRAIN_SPECS[d]
    tag = f"mlp_d{d}_{TRAIN_BASIS}_p{TRAIN_P:g}_n{spec['count']}_e{spec['epochs']}_s{spec['seed']}"
    path = ARTIFACTS / f"{tag}.json"
    if path.exists():
        return load_mlp(path)
    ARTIFACTS.mkdir(exist_ok=True)
    code = build_code(d)
    x, y = collect_dataset(
        code,
        uniform_model(TRAIN_P),
        spec["count"],
        None,
        np.random.default_rng([spec["seed"], 1]),
        TRAIN_BASIS,
    )
    mlp = init_mlp(d, spec["seed"])
    hyper = TrainConfig(epochs=spec["epochs"], lr=spec["lr"],
                        lr_decay=spec["lr_decay"])
    mlp, trace = train(mlp, (x, y), hyper, np.random.default_rng([spec["seed"], 2]))
    mlp.config.update(
        {
            "d": d,
            "basis": TRAIN_BASIS,
            "training_p": TRAIN_P,
            "examples": spec["count"],
            "epochs": spec["epochs"],
            "lr": spec["lr"],
            "lr_decay": spec["lr_decay"],
            "batch": hyper.batch,
            "optimizer": "adam(b1=0.9,b2=0.999)",
            "seed": spec["seed"],
            "final_loss": trace[-1],
        }
    )
    save_mlp(mlp, path)
    return mlp


@pytest.fixture(scope="session")
def trained_mlp_d3():
    return train_or_load(3)


@pytest.fixture(scope="session")
def trained_mlp_d5():
    return train_or_load(5)
