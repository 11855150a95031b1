#include "peakprob/model_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "peakprob/errors.hpp"

namespace peakprob {

namespace {

void set_full_precision(std::ostream& out) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
}

std::string next_line(std::istream& in, const char* what) {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) return line;
    }
    throw DataError(std::string("model file: unexpected end while reading ") + what);
}

void expect_token(std::istringstream& ss, std::string_view expected, const char* what) {
    std::string tok;
    ss >> tok;
    if (tok != expected) {
        throw DataError(std::string("model file: expected '") + std::string(expected) +
                        "' in " + what + ", got '" + tok + "'");
    }
}

} // namespace

void write_matrix(std::ostream& out, std::string_view name, const Eigen::MatrixXd& m) {
    set_full_precision(out);
    out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << m(i, j) << (j + 1 == m.cols() ? '\n' : ' ');
        }
    }
}

Eigen::MatrixXd read_matrix(std::istream& in, std::string_view expected_name) {
    std::istringstream hdr(next_line(in, "matrix header"));
    expect_token(hdr, "matrix", "matrix header");
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    hdr >> name >> rows >> cols;
    if (name != expected_name || rows < 0 || cols < 0) {
        throw DataError("model file: bad matrix header for '" + std::string(expected_name) +
                        "'");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        std::istringstream row(next_line(in, "matrix row"));
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (!(row >> m(i, j))) throw DataError("model file: short matrix row");
        }
    }
    return m;
}

namespace {

void write_tail(std::ostream& out, const char* name, const GpdTail& t) {
    out << name << ' ' << t.threshold << ' ' << t.xi << ' ' << t.beta << ' '
        << t.tail_fraction << ' ' << (t.used_pwm_fallback ? 1 : 0) << '\n';
}

GpdTail read_tail(std::istream& in, const char* name, TailSide side) {
    std::istringstream ss(next_line(in, name));
    expect_token(ss, name, "tail");
    GpdTail t;
    t.side = side;
    int pwm = 0;
    if (!(ss >> t.threshold >> t.xi >> t.beta >> t.tail_fraction >> pwm)) {
        throw DataError(std::string("model file: bad tail line for ") + name);
    }
    t.used_pwm_fallback = pwm != 0;
    return t;
}

} // namespace

void write_marginal(std::ostream& out, const SemiParametricMarginal& m) {
    set_full_precision(out);
    out << "marginal\n";
    out << "hour " << m.hour() << '\n';
    out << "n " << m.sample_size() << '\n';
    write_tail(out, "lower", m.lower());
    write_tail(out, "upper", m.upper());
    out << "body " << m.body_x().size() << '\n';
    for (std::size_t i = 0; i < m.body_x().size(); ++i) {
        out << m.body_x()[i] << ' ' << m.body_p()[i] << '\n';
    }
}

SemiParametricMarginal read_marginal(std::istream& in) {
    if (next_line(in, "marginal") != "marginal") {
        throw DataError("model file: expected 'marginal'");
    }
    std::istringstream hour_line(next_line(in, "hour"));
    expect_token(hour_line, "hour", "marginal");
    int hour = -1;
    hour_line >> hour;
    std::istringstream n_line(next_line(in, "n"));
    expect_token(n_line, "n", "marginal");
    int n = 0;
    n_line >> n;
    const GpdTail lower = read_tail(in, "lower", TailSide::Lower);
    const GpdTail upper = read_tail(in, "upper", TailSide::Upper);
    std::istringstream body_line(next_line(in, "body"));
    expect_token(body_line, "body", "marginal");
    std::size_t count = 0;
    body_line >> count;
    std::vector<double> bx(count), bp(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::istringstream row(next_line(in, "body knot"));
        if (!(row >> bx[i] >> bp[i])) throw DataError("model file: bad body knot");
    }
    return SemiParametricMarginal(std::move(bx), std::move(bp), lower, upper, n, hour);
}

void write_dependence(std::ostream& out, const GaussianDependenceModel& model) {
    set_full_precision(out);
    out << "dependence\n";
    out << "lambda " << model.lambda << '\n';
    out << "diag_penalized " << (model.diagonal_penalized ? 1 : 0) << '\n';
    if (model.layout) {
        out << "layout " << model.layout->zones.size() << '\n';
        for (const auto& [zone, range] : model.layout->zones) {
            out << zone << ' ' << range.start << ' ' << range.len << '\n';
        }
    } else {
        out << "layout 0\n";
    }
    write_matrix(out, "precision", model.precision);
    write_matrix(out, "covariance", model.covariance);
}

GaussianDependenceModel read_dependence(std::istream& in) {
    if (next_line(in, "dependence") != "dependence") {
        throw DataError("model file: expected 'dependence'");
    }
    GaussianDependenceModel model;
    std::istringstream lam(next_line(in, "lambda"));
    expect_token(lam, "lambda", "dependence");
    lam >> model.lambda;
    std::istringstream diag(next_line(in, "diag_penalized"));
    expect_token(diag, "diag_penalized", "dependence");
    int flag = 0;
    diag >> flag;
    model.diagonal_penalized = flag != 0;
    std::istringstream lay(next_line(in, "layout"));
    expect_token(lay, "layout", "dependence");
    std::size_t zones = 0;
    lay >> zones;
    if (zones > 0) {
        BlockLayout layout;
        for (std::size_t i = 0; i < zones; ++i) {
            std::istringstream zl(next_line(in, "layout zone"));
            std::string zone;
            BlockRange range;
            if (!(zl >> zone >> range.start >> range.len)) {
                throw DataError("model file: bad layout zone line");
            }
            layout.zones[zone] = range;
        }
        model.layout = std::move(layout);
    }
    model.precision = read_matrix(in, "precision");
    model.covariance = read_matrix(in, "covariance");
    return model;
}

namespace {

void write_marginal_list(std::ostream& out, const char* name,
                         const std::vector<SemiParametricMarginal>& list) {
    out << name << ' ' << list.size() << '\n';
    for (const auto& m : list) write_marginal(out, m);
}

std::vector<SemiParametricMarginal> read_marginal_list(std::istream& in, const char* name) {
    std::istringstream hdr(next_line(in, name));
    expect_token(hdr, name, "engine");
    std::size_t count = 0;
    hdr >> count;
    std::vector<SemiParametricMarginal> list;
    list.reserve(count);
    for (std::size_t i = 0; i < count; ++i) list.push_back(read_marginal(in));
    return list;
}

} // namespace

void write_engine(std::ostream& out, const FittedEngine& engine) {
    set_full_precision(out);
    out << "peakprob-engine 1\n";
    out << "cutoff " << to_iso(engine.cutoff) << '\n';
    out << "first_hour " << engine.first_hour << '\n';
    out << "zone " << (engine.zone_id.empty() ? "-" : engine.zone_id) << '\n';
    out << "vintage " << (engine.vintage_label.empty() ? "-" : engine.vintage_label) << '\n';
    const auto& c = engine.config;
    out << "config " << c.marginal.tail_fraction << ' ' << c.marginal.min_samples << ' '
        << c.glasso.lambda << ' ' << (c.glasso.penalize_diagonal ? 1 : 0) << ' '
        << c.glasso.gap_tol << ' ' << c.glasso.max_sweeps << ' ' << c.cv_folds << ' '
        << c.min_history_days << '\n';
    write_marginal_list(out, "dev_marginals", engine.dev_marginals);
    write_dependence(out, engine.dev_model);
    out << "conditional " << (engine.cond ? 1 : 0) << '\n';
    if (engine.cond) {
        out << "zone1 " << engine.cond->zone1_id << '\n';
        out << "zone2 " << engine.cond->zone2_id << '\n';
        write_marginal_list(out, "z1_marginals", engine.cond->zone1_marginals);
        write_marginal_list(out, "z2_marginals", engine.cond->zone2_marginals);
        write_dependence(out, engine.cond->joint);
    }
    out << "end\n";
}

FittedEngine read_engine(std::istream& in) {
    if (next_line(in, "engine header") != "peakprob-engine 1") {
        throw DataError("model file: not a peakprob engine file (version 1)");
    }
    FittedEngine engine;
    std::istringstream cut(next_line(in, "cutoff"));
    expect_token(cut, "cutoff", "engine");
    std::string date;
    cut >> date;
    engine.cutoff = parse_date(date);
    std::istringstream fh(next_line(in, "first_hour"));
    expect_token(fh, "first_hour", "engine");
    fh >> engine.first_hour;
    std::istringstream zl(next_line(in, "zone"));
    expect_token(zl, "zone", "engine");
    zl >> engine.zone_id;
    if (engine.zone_id == "-") engine.zone_id.clear();
    std::istringstream vl(next_line(in, "vintage"));
    expect_token(vl, "vintage", "engine");
    vl >> engine.vintage_label;
    if (engine.vintage_label == "-") engine.vintage_label.clear();
    std::istringstream cfg(next_line(in, "config"));
    expect_token(cfg, "config", "engine");
    auto& c = engine.config;
    int diag = 0;
    if (!(cfg >> c.marginal.tail_fraction >> c.marginal.min_samples >> c.glasso.lambda >>
          diag >> c.glasso.gap_tol >> c.glasso.max_sweeps >> c.cv_folds >>
          c.min_history_days)) {
        throw DataError("model file: bad config line");
    }
    c.glasso.penalize_diagonal = diag != 0;
    engine.dev_marginals = read_marginal_list(in, "dev_marginals");
    engine.dev_model = read_dependence(in);
    std::istringstream cond_line(next_line(in, "conditional"));
    expect_token(cond_line, "conditional", "engine");
    int has_cond = 0;
    cond_line >> has_cond;
    if (has_cond) {
        FittedEngine::ConditionalPart part;
        std::istringstream z1(next_line(in, "zone1"));
        expect_token(z1, "zone1", "engine");
        z1 >> part.zone1_id;
        std::istringstream z2(next_line(in, "zone2"));
        expect_token(z2, "zone2", "engine");
        z2 >> part.zone2_id;
        part.zone1_marginals = read_marginal_list(in, "z1_marginals");
        part.zone2_marginals = read_marginal_list(in, "z2_marginals");
        part.joint = read_dependence(in);
        engine.cond = std::move(part);
    }
    if (next_line(in, "end") != "end") throw DataError("model file: missing 'end'");
    return engine;
}

void write_engine_file(const std::string& path, const FittedEngine& engine) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write engine file: " + path);
    write_engine(out, engine);
}

FittedEngine read_engine_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open engine file: " + path);
    return read_engine(in);
}

void write_batch_csv(std::ostream& out, const ScenarioBatch& batch) {
    set_full_precision(out);
    out << "scenario_id,hour,mw\n";
    for (int s = 0; s < batch.n_scenarios(); ++s) {
        for (int h = 0; h < batch.horizon(); ++h) {
            out << s << ',' << batch.first_hour + h << ',' << batch.paths(s, h) << '\n';
        }
    }
}

void write_batch_binary(std::ostream& out, const ScenarioBatch& batch) {
    out << "PPBATCH1 " << batch.n_scenarios() << ' ' << batch.horizon() << ' '
        << batch.first_hour << ' ' << batch.seed << ' '
        << (batch.zone_id.empty() ? "-" : batch.zone_id) << ' ' << to_iso(batch.day) << '\n';
    for (int s = 0; s < batch.n_scenarios(); ++s) {
        for (int h = 0; h < batch.horizon(); ++h) {
            const double v = batch.paths(s, h);
            out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    }
}

ScenarioBatch read_batch_binary(std::istream& in) {
    std::string header;
    std::getline(in, header);
    std::istringstream hdr(header);
    std::string magic, zone, day;
    int rows = 0, cols = 0, first_hour = 0;
    std::uint64_t seed = 0;
    if (!(hdr >> magic >> rows >> cols >> first_hour >> seed >> zone >> day) ||
        magic != "PPBATCH1" || rows < 1 || cols < 1) {
        throw DataError("bad scenario batch dump header");
    }
    ScenarioBatch batch;
    batch.zone_id = zone == "-" ? "" : zone;
    batch.day = parse_date(day);
    batch.first_hour = first_hour;
    batch.seed = seed;
    batch.paths.resize(rows, cols);
    for (int s = 0; s < rows; ++s) {
        for (int h = 0; h < cols; ++h) {
            double v;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            if (!in) throw DataError("truncated scenario batch dump");
            batch.paths(s, h) = v;
        }
    }
    return batch;
}

} // namespace peakprob
