"""Build functional handles from declarative JSON specs.

A functional spec is one of::

    {"phi": "shannon" | "tsallis" (+ "alpha") | "gini_simpson"}
    {"kernel": <kernel spec>, "estimator": "u_stat" | "v_stat" (optional)}
    {"loss": "zero_one" | "quadratic" | {"table": ...}}
    {"ce": "ce1" | "ce2"}
    {"null": true}

Handles carry the capability flags the harness needs plus, where available,
an exact raw-sample evaluation for the sensitivity pipeline.
"""

from __future__ import annotations

from typing import Mapping

from .counterexamples import ce1_value, ce2_value
from .entropy import phi_entropy, phi_spec_from_json
from .errors import CapabilityError, ValidationError
from .expected_loss import expected_loss_value, loss_from_json
from .harness import FunctionalHandle
from .measures import Atomic, MeasureRepr
from .quadratic import kernel_from_json, quf_value, quf_value_samples


def _require_atomic(mr: MeasureRepr, name: str) -> Atomic:
    if not isinstance(mr, Atomic):
        raise CapabilityError(f"{name} evaluates purely atomic measures only")
    return mr


def functional_from_spec(spec: Mapping) -> FunctionalHandle:
    if not isinstance(spec, Mapping):
        raise ValidationError(f"a functional spec must be a JSON object, got {spec!r}")

    if "phi" in spec:
        phi = phi_spec_from_json(spec)

        def evaluate(mr, _phi=phi):
            return phi_entropy(_phi, _require_atomic(mr, _phi.name).measure)

        return FunctionalHandle(name=f"phi:{phi.name}", evaluate=evaluate,
                                atomic_only=True, spec=dict(spec))

    if "kernel" in spec:
        kernel = kernel_from_json(spec)
        estimator = spec.get("estimator", "u_stat")
        if estimator not in ("u_stat", "v_stat"):
            raise ValidationError(f"unknown estimator {estimator!r}")

        def evaluate(mr, _k=kernel):
            # declared measures get the functional itself (the full double sum)
            return quf_value(_k, _require_atomic(mr, _k.name).measure, "v_stat")

        def evaluate_samples(values, _k=kernel, _est=estimator):
            return quf_value_samples(_k, values, _est)

        return FunctionalHandle(name=f"quf:{kernel.name}", evaluate=evaluate,
                                evaluate_samples=evaluate_samples,
                                atomic_only=True, spec=dict(spec))

    if "loss" in spec:
        loss = loss_from_json(spec)

        def evaluate(mr, _l=loss):
            return expected_loss_value(_l, _require_atomic(mr, _l.name).measure).value

        return FunctionalHandle(name=f"loss:{loss.name}", evaluate=evaluate,
                                atomic_only=True, spec=dict(spec))

    if "ce" in spec:
        which = spec["ce"]
        if which == "ce1":
            return FunctionalHandle(name="ce1", evaluate=ce1_value,
                                    atomic_only=False, tailed_capable=True,
                                    spec=dict(spec))
        if which == "ce2":
            return FunctionalHandle(name="ce2", evaluate=ce2_value,
                                    atomic_only=False, tailed_capable=True,
                                    atomless_capable=True, spec=dict(spec))
        raise ValidationError(f"unknown counterexample {which!r}")

    if spec.get("null"):
        return FunctionalHandle(name="null", evaluate=lambda mr: 0.0,
                                atomic_only=False, tailed_capable=True,
                                atomless_capable=True, spec=dict(spec))

    raise ValidationError(f"unrecognized functional spec {spec!r}")
