"""Mining-load demand-response modeling: transforms, tests, SARIMA and synthesis."""

import datetime
import json

from ._core import (
    DataError,
    DegenerateError,
    DemandModel,
    Error,
    Panel,
    PreconditionError,
    SarimaFit,
    SarimaOrder,
    acf,
    adf_test,
    apply_transforms,
    breusch_pagan,
    durbin_watson,
    fit_transforms,
    forecast,
    fourcp_charge,
    gaussianize,
    generate_synthetic,
    jarque_bera,
    ljung_box,
    make_scenario,
    metrics,
    ols,
    pacf,
    predict,
    read_panel,
    reference_model,
    rsi,
    sarima_fit,
    sarima_simulate,
    select_order,
    warmup_days,
)
from ._core import fit_demand_model as _fit_demand_model

__version__ = "0.1.0"


def fit_demand_model(panel, season, transforms, train_fraction=0.5, alpha=0.05):
    """Fit one season's model. Returns (DemandModel, report dict)."""
    model, report = _fit_demand_model(panel, season, transforms, train_fraction, alpha)
    return model, json.loads(report)


def synthesize(season, days, seed, start=None, with_btc=False, threads=1):
    """Synthetic panel from the reference model with a generated scenario.

    The scenario uses `seed` and the generator `seed + 1`, as the CLI does.
    """
    model = reference_model(season)
    if start is None:
        start = "2022-06-01" if season == "summer" else "2022-01-01"
    warm = warmup_days(model)
    begin = datetime.date.fromisoformat(start) - datetime.timedelta(days=warm)
    scenario = make_scenario(model, begin.isoformat(), (warm + days) * 24, seed, with_btc)
    return generate_synthetic(model, scenario, days, seed + 1, threads)
