#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "minerdr/drmodel.hpp"
#include "minerdr/error.hpp"
#include "minerdr/indicators.hpp"
#include "minerdr/serialize.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace minerdr;

namespace {

Hour hour_from(const std::string& stamp) {
    auto h = parse_hour(stamp);
    if (!h) {
        auto d = parse_day(stamp);
        if (!d) throw PreconditionError("cannot parse time '" + stamp + "'");
        return first_hour(*d);
    }
    return *h;
}

Season season_from(const std::string& name) {
    auto s = parse_season(name);
    if (!s) throw PreconditionError("unknown season '" + name + "'");
    return *s;
}

Series series_from(const std::string& name) {
    auto s = parse_series(name);
    if (!s) throw PreconditionError("unknown series '" + name + "'");
    return *s;
}

// JSON crosses the boundary as text; the Python side decodes it.
std::string as_text(const serialize::Json& j) { return j.dump(); }

py::dict report(const stats::TestReport& r) {
    py::dict d("name"_a = r.name, "statistic"_a = r.statistic, "df_or_lags"_a = r.df_or_lags,
               "decision_note"_a = r.decision_note, "extras"_a = r.extras);
    d["p_value"] = r.p_value ? py::cast(*r.p_value) : py::none();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Mining-load demand-response modeling";

    static py::exception<Error> error(m, "Error");
    static py::exception<PreconditionError> precondition(m, "PreconditionError", error.ptr());
    static py::exception<DataError> data(m, "DataError", error.ptr());
    static py::exception<DegenerateError> degenerate(m, "DegenerateError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const PreconditionError& e) {
            PyErr_SetString(precondition.ptr(), e.what());
        } catch (const DataError& e) {
            PyErr_SetString(data.ptr(), e.what());
        } catch (const DegenerateError& e) {
            PyErr_SetString(degenerate.ptr(), e.what());
        } catch (const Error& e) {
            PyErr_SetString(error.ptr(), e.what());
        }
    });

    py::class_<HourlyPanel>(m, "Panel")
        .def_property_readonly("start", [](const HourlyPanel& p) { return format_hour(p.start); })
        .def("__len__", &HourlyPanel::size)
        .def("column", [](const HourlyPanel& p, const std::string& s) {
            auto c = p.column(series_from(s));
            return std::vector<double>(c.begin(), c.end());
        })
        .def("set_column", [](HourlyPanel& p, const std::string& s, std::vector<double> v) {
            if (v.size() != p.size()) throw PreconditionError("column length differs from the panel");
            p.column(series_from(s)) = std::move(v);
        })
        .def("timestamps", [](const HourlyPanel& p) {
            std::vector<std::string> out;
            for (std::size_t i = 0; i < p.size(); ++i) out.push_back(format_hour(p.hour(i)));
            return out;
        })
        .def("write_csv", [](const HourlyPanel& p, const std::filesystem::path& path) { write_panel_csv(p, path); });

    m.def("read_panel", [](const std::filesystem::path& path) { return read_panel_csv(path).panel; }, "path"_a);

    // stats
    m.def("jarque_bera", [](std::vector<double> x) { return report(stats::jarque_bera(x)); }, "x"_a);
    m.def("adf_test", [](std::vector<double> x, const std::string& regression, std::optional<std::size_t> max_lag) {
        stats::AdfOptions o;
        if (regression == "n") o.regression = stats::AdfRegression::none;
        else if (regression == "c") o.regression = stats::AdfRegression::constant;
        else if (regression == "ct") o.regression = stats::AdfRegression::constant_trend;
        else throw PreconditionError("regression must be n, c or ct");
        o.max_lag = max_lag;
        return report(stats::adf_test(x, o));
    }, "x"_a, "regression"_a = "c", "max_lag"_a = py::none());
    m.def("breusch_pagan", [](std::vector<double> e, const Eigen::MatrixXd& X) { return report(stats::breusch_pagan(e, X)); },
          "residuals"_a, "regressors"_a);
    m.def("durbin_watson", [](std::vector<double> e) { return report(stats::durbin_watson(e)); }, "residuals"_a);
    m.def("ljung_box", [](std::vector<double> e, std::size_t h, std::size_t fitted) {
        return report(stats::ljung_box(e, h, fitted));
    }, "residuals"_a, "lags"_a, "fitted_params"_a = 0);
    m.def("acf", [](std::vector<double> x, std::size_t lags, std::size_t s) { return stats::acf(x, lags, s); },
          "x"_a, "max_lag"_a, "seasonal_period"_a = 0);
    m.def("pacf", [](std::vector<double> x, std::size_t lags, std::size_t s) { return stats::pacf(x, lags, s); },
          "x"_a, "max_lag"_a, "seasonal_period"_a = 0);

    // transform
    m.def("gaussianize", [](std::vector<double> x) { return transform::gaussianize(x).z; }, "x"_a);
    m.def("fit_transforms", [](const HourlyPanel& p, int window) { return as_text(serialize::to_json(transform::fit_panel(p, window))); },
          "panel"_a, "trend_window_days"_a = 7, "Fitted transforms as JSON text.");
    m.def("apply_transforms", [](const std::string& transforms, const HourlyPanel& p) {
        return serialize::transform_set_from_json(serialize::Json::parse(transforms)).apply(p);
    }, "transforms"_a, "panel"_a);

    // sarima
    py::class_<sarima::SarimaOrder>(m, "SarimaOrder")
        .def(py::init([](int p, int d, int q, int P, int D, int Q, int S) {
            sarima::SarimaOrder o{p, d, q, P, D, Q, S};
            o.validate();
            return o;
        }), "p"_a = 0, "d"_a = 0, "q"_a = 0, "P"_a = 0, "D"_a = 0, "Q"_a = 0, "S"_a = 24)
        .def_static("parse", &sarima::parse_order, "text"_a)
        .def_readonly("p", &sarima::SarimaOrder::p)
        .def_readonly("d", &sarima::SarimaOrder::d)
        .def_readonly("q", &sarima::SarimaOrder::q)
        .def_readonly("P", &sarima::SarimaOrder::P)
        .def_readonly("D", &sarima::SarimaOrder::D)
        .def_readonly("Q", &sarima::SarimaOrder::Q)
        .def_readonly("S", &sarima::SarimaOrder::S)
        .def("__eq__", [](const sarima::SarimaOrder& a, const sarima::SarimaOrder& b) { return a == b; })
        .def("__repr__", &sarima::SarimaOrder::label);

    py::class_<sarima::SarimaFit>(m, "SarimaFit")
        .def_property_readonly("order", [](const sarima::SarimaFit& f) { return f.order; })
        .def_property_readonly("phi", [](const sarima::SarimaFit& f) { return f.params.phi; })
        .def_property_readonly("theta", [](const sarima::SarimaFit& f) { return f.params.theta; })
        .def_property_readonly("Phi", [](const sarima::SarimaFit& f) { return f.params.Phi; })
        .def_property_readonly("Theta", [](const sarima::SarimaFit& f) { return f.params.Theta; })
        .def_property_readonly("sigma", [](const sarima::SarimaFit& f) { return f.params.sigma; })
        .def_readonly("se", &sarima::SarimaFit::se)
        .def_readonly("p_values", &sarima::SarimaFit::p_values)
        .def_readonly("aic", &sarima::SarimaFit::aic)
        .def_readonly("loglik", &sarima::SarimaFit::loglik)
        .def_readonly("css", &sarima::SarimaFit::css)
        .def_readonly("residuals", &sarima::SarimaFit::residuals)
        .def("parameter_names", &sarima::SarimaFit::parameter_names);

    m.def("sarima_simulate", [](const sarima::SarimaOrder& o, std::size_t n, std::uint64_t seed, std::vector<double> phi,
                                std::vector<double> theta, std::vector<double> Phi, std::vector<double> Theta,
                                double sigma) {
        sarima::SarimaParams prm{std::move(phi), std::move(theta), std::move(Phi), std::move(Theta), sigma};
        return sarima::simulate(o, prm, n, seed);
    }, "order"_a, "n"_a, "seed"_a, "phi"_a = std::vector<double>{}, "theta"_a = std::vector<double>{},
       "Phi"_a = std::vector<double>{}, "Theta"_a = std::vector<double>{}, "sigma"_a = 1.0);
    m.def("sarima_fit", [](std::vector<double> x, const sarima::SarimaOrder& o) { return sarima::fit(x, o); },
          "series"_a, "order"_a, py::call_guard<py::gil_scoped_release>());
    m.def("select_order", [](std::vector<double> x, std::vector<sarima::SarimaOrder> grid) {
        auto sel = sarima::select_order(std::span<const double>(x), grid);
        std::vector<std::pair<sarima::SarimaOrder, std::optional<double>>> table;
        for (const auto& c : sel.table) table.emplace_back(c.order, c.aic);
        return py::make_tuple(sel.fit, table);
    }, "series"_a, "grid"_a);
    m.def("forecast", [](const sarima::SarimaFit& f, std::size_t h, std::vector<double> history) {
        auto fc = sarima::forecast(f, h, history);
        return py::make_tuple(fc.mean, fc.std);
    }, "fit"_a, "horizon"_a, "history"_a);

    // regress
    m.def("ols", [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
        auto r = regress::ols(X, y);
        return py::dict("coefficients"_a = r.coefficients, "se"_a = r.se, "t_values"_a = r.t_values,
                        "p_values"_a = r.p_values, "sigma2"_a = r.sigma2, "residuals"_a = r.residuals);
    }, "X"_a, "y"_a);
    m.def("metrics", [](std::vector<double> truth, std::vector<double> pred) {
        auto r = regress::metrics(truth, pred);
        return py::dict("mse"_a = r.mse, "rmse"_a = r.rmse, "mape"_a = r.mape, "mape_excluded"_a = r.mape_excluded,
                        "r_squared"_a = r.r_squared, "r_squared_iqr75"_a = r.r_squared_iqr75, "n"_a = r.n);
    }, "truth"_a, "predicted"_a);

    // indicators
    m.def("rsi", [](std::vector<double> closes, std::size_t window) {
        indicators::DailySeries s;
        s.values = std::move(closes);
        for (std::size_t i = 0; i < s.values.size(); ++i) s.dates.push_back(Day{static_cast<std::int64_t>(i)});
        return indicators::rsi(s, window).values;
    }, "closes"_a, "window"_a);

    // drmodel
    py::class_<drmodel::DemandModel>(m, "DemandModel")
        .def_property_readonly("season", [](const drmodel::DemandModel& d) { return std::string(season_name(d.season)); })
        .def_property_readonly("terms", [](const drmodel::DemandModel& d) {
            std::vector<std::tuple<std::string, double, double>> out;
            for (const auto& t : d.terms) out.emplace_back(t.column.name(), t.coef, t.se);
            return out;
        })
        .def_readonly("sarima", &drmodel::DemandModel::sarima)
        .def("max_lag", &drmodel::DemandModel::max_lag)
        .def("to_json", [](const drmodel::DemandModel& d) { return as_text(serialize::to_json(d)); })
        .def_static("from_json", [](const std::string& text) {
            return serialize::model_from_json(serialize::Json::parse(text));
        }, "text"_a);

    m.def("reference_model", [](const std::string& season) { return drmodel::reference_model(season_from(season)); },
          "season"_a);
    m.def("make_scenario", [](const drmodel::DemandModel& model, const std::string& start, std::size_t hours,
                              std::uint64_t seed, bool with_btc) {
        drmodel::ScenarioOptions o;
        o.with_btc = with_btc;
        return drmodel::make_scenario(hour_from(start), hours, seed, model.transforms, o);
    }, "model"_a, "start"_a, "hours"_a, "seed"_a, "with_btc"_a = false);
    m.def("warmup_days", &drmodel::warmup_days, "model"_a);
    m.def("generate_synthetic", [](const drmodel::DemandModel& model, const HourlyPanel& scenario, std::size_t days,
                                   std::uint64_t seed, unsigned threads) {
        drmodel::SyntheticOptions o;
        o.threads = threads;
        return drmodel::generate_synthetic(model, scenario, days, seed, o);
    }, "model"_a, "scenario"_a, "days"_a, "seed"_a, "threads"_a = 1, py::call_guard<py::gil_scoped_release>());
    m.def("predict", [](const drmodel::DemandModel& model, const HourlyPanel& panel, bool one_step) {
        return drmodel::predict(model, panel, one_step ? drmodel::PredictMode::one_step : drmodel::PredictMode::deterministic);
    }, "model"_a, "panel"_a, "one_step"_a = false);
    m.def("fit_demand_model", [](const HourlyPanel& panel, const std::string& season, const std::string& transforms,
                                 double train_fraction, double alpha) {
        drmodel::FitConfig cfg;
        cfg.train_fraction = train_fraction;
        cfg.alpha = alpha;
        auto set = serialize::transform_set_from_json(serialize::Json::parse(transforms));
        auto rep = drmodel::fit_demand_model(panel, season_from(season), set, cfg);
        return py::make_tuple(rep.model, as_text(serialize::to_json(rep)));
    }, "panel"_a, "season"_a, "transforms"_a, "train_fraction"_a = 0.5, "alpha"_a = 0.05);
    m.def("fourcp_charge", &drmodel::fourcp_charge, "avg_4cp_mw"_a, "rate"_a, "months"_a = 12.0);
}
