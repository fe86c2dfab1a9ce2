"""Hypothesis strategies that generate valid scenarios for every kind."""

from hypothesis import strategies as st

from cfc_lab.scenario import OUTPUT_FIELDS, SCHEMAS, Scenario


def _value(spec):
    if spec.type == "choice":
        return st.sampled_from(spec.choices)
    if spec.type == "int":
        return st.integers(int(spec.lo), int(spec.hi))
    lo, hi = spec.lo, spec.hi
    floats = st.floats(lo, hi, allow_nan=False, allow_infinity=False, exclude_min=spec.lo_open)
    return st.one_of(floats, st.just("auto")) if spec.allow_auto else floats


@st.composite
def scenarios(draw, kinds=tuple(SCHEMAS)):
    kind = draw(st.sampled_from(kinds))
    params = {}
    for key, spec in SCHEMAS[kind].items():
        if spec.required or draw(st.booleans()):
            params[key] = draw(_value(spec))
    outputs = tuple(draw(st.lists(st.sampled_from(OUTPUT_FIELDS[kind]), unique=True, max_size=3)))
    return Scenario(kind, params, outputs)
