#include "proxsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "proxsim/error.hpp"
#include "proxsim/text.hpp"

namespace proxsim::report {

const char* to_string(Category c) {
    switch (c) {
    case Category::Collection: return "Collection";
    case Category::Processing: return "Processing";
    case Category::Dissemination: return "Dissemination";
    case Category::Invasion: return "Invasion";
    }
    return "?";
}

const std::vector<std::pair<Category, std::vector<std::string>>>& taxonomy() {
    static const std::vector<std::pair<Category, std::vector<std::string>>> t{
        {Category::Collection, {"Surveillance", "Information probing", "Interrogation"}},
        {Category::Processing, {"Aggregation", "Identification", "Insecurity", "Secondary use", "Exclusion"}},
        {Category::Dissemination,
         {"Breach of confidentiality", "Disclosure", "Exposure", "Increased accessibility", "Appropriation",
          "Distortion"}},
        {Category::Invasion, {"Intrusion"}},
    };
    return t;
}

bool in_taxonomy(const Label& l) {
    for (const auto& [cat, acts] : taxonomy()) {
        if (cat == l.category) return std::find(acts.begin(), acts.end(), l.activity) != acts.end();
    }
    return false;
}

Mapping default_mapping() {
    Mapping m;
    const Label surveillance{Category::Collection, "Surveillance"};
    const std::vector<Label> processing{{Category::Processing, "Identification"}, {Category::Processing, "Aggregation"}};
    m.by_kind[EventKind::Probe] = {surveillance};
    m.by_kind[EventKind::ProfilePoll] = {surveillance};
    m.by_kind[EventKind::LocalizeResult] = processing;
    m.by_kind[EventKind::IdentifyRound] = processing;
    m.by_kind[EventKind::Export] = {{Category::Dissemination, "Increased accessibility"}};
    return m;
}

void validate(const Mapping& m) {
    for (auto k : {EventKind::Probe, EventKind::ProfilePoll, EventKind::LocalizeResult, EventKind::IdentifyRound,
                   EventKind::Export}) {
        const auto it = m.by_kind.find(k);
        if (it == m.by_kind.end() || it->second.empty()) {
            throw ValidationError(std::string("no label for event kind ") + to_string(k));
        }
        for (const auto& l : it->second) {
            if (!in_taxonomy(l)) throw ValidationError("label '" + l.activity + "' is not in the taxonomy");
        }
    }
    if (!in_taxonomy(m.intrusion)) throw ValidationError("intrusion label is not in the taxonomy");
    if (m.intrusion_min_fixes < 1) throw ValidationError("intrusion_min_fixes must be >= 1");
}

ViolationReport classify(const AttackTrace& trace, const Mapping& mapping) {
    validate(mapping);
    const auto& ev = trace.events();
    std::map<std::uint64_t, int> fixes_per_target;
    for (const auto& e : ev) {
        if (e.kind == EventKind::LocalizeResult) ++fixes_per_target[e.target];
    }

    ViolationReport r;
    for (const auto& [cat, acts] : taxonomy()) r.category_events[cat] = 0;
    r.event_labels.reserve(ev.size());
    for (const auto& e : ev) {
        auto labels = mapping.by_kind.at(e.kind);
        if (e.kind == EventKind::LocalizeResult && fixes_per_target[e.target] >= mapping.intrusion_min_fixes) {
            labels.push_back(mapping.intrusion);
        }
        std::set<Category> cats;
        for (const auto& l : labels) {
            cats.insert(l.category);
            ++r.activity_events[l];
        }
        for (auto c : cats) ++r.category_events[c];
        r.event_labels.push_back(std::move(labels));
    }
    for (const auto& [cat, acts] : taxonomy()) {
        for (const auto& a : acts) {
            const Label l{cat, a};
            if (!r.activity_events.count(l)) r.unexercised.push_back(l);
        }
    }
    return r;
}

namespace {

namespace fs = std::filesystem;

constexpr double kWidth = 800, kHeight = 600;
constexpr double kLeft = 90, kRight = 30, kTop = 50, kBottom = 70;

std::string num(double v) { return text::fmt_fixed(v, 2); }

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Axis {
    double lo = 0, hi = 1;
    bool log = false;
    std::string label;

    double frac(double v) const {
        if (log) return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
        return (v - lo) / (hi - lo);
    }
    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            for (int e = static_cast<int>(std::floor(std::log10(lo))); e <= static_cast<int>(std::ceil(std::log10(hi)));
                 ++e) {
                const double v = std::pow(10.0, e);
                if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) out.push_back(v);
            }
        } else {
            for (int i = 0; i <= 5; ++i) out.push_back(lo + (hi - lo) * i / 5.0);
        }
        return out;
    }
};

Axis make_axis(std::vector<double> values, bool log, std::string label) {
    Axis a;
    a.log = log;
    a.label = std::move(label);
    if (log) {
        for (auto& v : values) v = std::max(v, 1e-12);
    }
    if (values.empty()) values = {log ? 1.0 : 0.0};
    auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    a.lo = *mn;
    a.hi = *mx;
    if (log) {
        a.lo = std::pow(10.0, std::floor(std::log10(a.lo)));
        a.hi = std::pow(10.0, std::ceil(std::log10(a.hi)));
        if (a.hi <= a.lo) a.hi = a.lo * 10;
    } else {
        const double pad = (a.hi - a.lo) * 0.05;
        a.lo = std::min(0.0, a.lo - pad);
        a.hi = a.hi + (pad > 0 ? pad : 1.0);
    }
    return a;
}

class Plot {
public:
    Plot(std::string id, std::string title, Axis x, Axis y) : id_(std::move(id)), title_(std::move(title)), x_(std::move(x)), y_(std::move(y)) {}

    double px(double v) const { return kLeft + x_.frac(v) * (kWidth - kLeft - kRight); }
    double py(double v) const { return kHeight - kBottom - y_.frac(v) * (kHeight - kTop - kBottom); }

    void polyline(const std::string& id, const std::vector<std::pair<double, double>>& pts, const std::string& colour) {
        data_ << "<polyline id=\"" << escape(id) << "\" fill=\"none\" stroke=\"" << colour
              << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            data_ << (i ? " " : "") << num(px(pts[i].first)) << ',' << num(py(pts[i].second));
        }
        data_ << "\"/>\n";
    }
    void point(const std::string& id, double x, double y, const std::string& colour) {
        data_ << "<circle id=\"" << escape(id) << "\" cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y))
              << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    }
    void raw(const std::string& s) { data_ << s; }

    std::string str() const {
        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" id=\"" << id_ << "\" width=\"800\" height=\"600\" "
            << "viewBox=\"0 0 800 600\">\n";
        out << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
        out << "<g id=\"title\"><text x=\"400\" y=\"30\" text-anchor=\"middle\" font-size=\"18\">" << escape(title_)
            << "</text></g>\n";
        out << "<g id=\"axes\" font-size=\"12\">\n";
        out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(kWidth - kLeft - kRight)
            << "\" height=\"" << num(kHeight - kTop - kBottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (double t : x_.ticks()) {
            out << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kHeight - kBottom + 18)
                << "\" text-anchor=\"middle\">" << text::fmt_double(t) << "</text>\n";
        }
        for (double t : y_.ticks()) {
            out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
                << text::fmt_double(t) << "</text>\n";
        }
        out << "<text x=\"400\" y=\"" << num(kHeight - 20) << "\" text-anchor=\"middle\">" << escape(x_.label)
            << "</text>\n";
        out << "<text x=\"20\" y=\"300\" text-anchor=\"middle\" transform=\"rotate(-90 20 300)\">" << escape(y_.label)
            << "</text>\n";
        out << "</g>\n<g id=\"data\">\n" << data_.str() << "</g>\n</svg>\n";
        return out.str();
    }

private:
    std::string id_, title_;
    Axis x_, y_;
    std::ostringstream data_;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

void write_file(const fs::path& path, const std::string& content, std::vector<fs::path>& written) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write to " + path.string() + " failed");
    written.push_back(path);
}

std::string runtime_csv(const std::vector<mlat::TimingCell>& cells) {
    std::ostringstream out;
    out << "samples,iterations,seconds_per_solve\n";
    for (const auto& c : cells) out << c.samples << ',' << c.iterations << ',' << text::fmt_double(c.seconds_per_solve) << '\n';
    return out.str();
}

std::string runtime_svg(const std::vector<mlat::TimingCell>& cells) {
    std::vector<double> xs, ys;
    std::map<int, std::vector<std::pair<double, double>>> by_iter;
    for (const auto& c : cells) {
        xs.push_back(c.samples);
        ys.push_back(c.seconds_per_solve);
        by_iter[c.iterations].emplace_back(c.samples, std::max(c.seconds_per_solve, 1e-12));
    }
    Plot p("runtime", "Time per position estimate", make_axis(xs, true, "distance samples"),
           make_axis(ys, true, "seconds per solve"));
    int i = 0;
    for (auto& [iters, pts] : by_iter) {
        std::sort(pts.begin(), pts.end());
        const auto colour = kPalette[i++ % 6];
        p.polyline("iters-" + std::to_string(iters), pts, colour);
        for (const auto& [x, y] : pts) {
            p.point("cell-" + std::to_string(iters) + "-" + text::fmt_double(x), x, y, colour);
        }
    }
    return p.str();
}

std::string probe_svg(const ProbeMap& m) {
    double x0 = m.estimate.x_m, x1 = x0, y0 = m.estimate.y_m, y1 = y0;
    const auto grow = [&](double x, double y, double r) {
        x0 = std::min(x0, x - r);
        x1 = std::max(x1, x + r);
        y0 = std::min(y0, y - r);
        y1 = std::max(y1, y + r);
    };
    for (const auto& s : m.samples) grow(s.observer.x_m, s.observer.y_m, s.reported_m);
    if (m.truth) grow(m.truth->x_m, m.truth->y_m, 0.0);
    const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
    const double span = std::max({(x1 - x0) / w, (y1 - y0) / h, 1e-9}) * 1.05;
    const double cx = (x0 + x1) / 2, cy = (y0 + y1) / 2;
    // Equal scale on both axes so circles stay circles.
    Axis ax{cx - span * w / 2, cx + span * w / 2, false, "east (m)"};
    Axis ay{cy - span * h / 2, cy + span * h / 2, false, "north (m)"};
    Plot p("probe_map", "Probe positions and reported distances", ax, ay);
    std::ostringstream d;
    for (std::size_t i = 0; i < m.samples.size(); ++i) {
        const auto& s = m.samples[i];
        d << "<circle id=\"sample-" << i << "\" cx=\"" << num(p.px(s.observer.x_m)) << "\" cy=\""
          << num(p.py(s.observer.y_m)) << "\" r=\"" << num(s.reported_m / span)
          << "\" fill=\"none\" stroke=\"#1f77b4\" stroke-opacity=\"0.6\"/>\n";
        d << "<circle id=\"probe-" << i << "\" cx=\"" << num(p.px(s.observer.x_m)) << "\" cy=\""
          << num(p.py(s.observer.y_m)) << "\" r=\"2\" fill=\"#1f77b4\"/>\n";
    }
    p.raw(d.str());
    p.point("estimate", m.estimate.x_m, m.estimate.y_m, "#d62728");
    if (m.truth) p.point("truth", m.truth->x_m, m.truth->y_m, "#2ca02c");
    return p.str();
}

std::vector<std::vector<std::size_t>> carried(const std::vector<std::vector<std::size_t>>& runs, std::size_t& rounds) {
    rounds = 0;
    for (const auto& r : runs) rounds = std::max(rounds, r.size());
    std::vector<std::vector<std::size_t>> out;
    for (const auto& r : runs) {
        if (r.empty()) continue;
        auto v = r;
        v.resize(rounds, r.back());
        out.push_back(std::move(v));
    }
    return out;
}

std::string pool_csv(const std::vector<std::vector<std::size_t>>& runs) {
    std::ostringstream out;
    out << "run,round,pool_size\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        for (std::size_t k = 0; k < runs[i].size(); ++k) out << i << ',' << k << ',' << runs[i][k] << '\n';
    }
    return out.str();
}

std::string pool_svg(const std::vector<std::vector<std::size_t>>& runs) {
    std::size_t rounds = 0;
    const auto full = carried(runs, rounds);
    std::vector<double> xs{0.0, static_cast<double>(std::max<std::size_t>(rounds, 2) - 1)}, ys{1.0};
    for (const auto& r : full) {
        for (auto v : r) ys.push_back(std::max<double>(static_cast<double>(v), 1.0));
    }
    Plot p("pool_sizes", "Candidate pool per refinement round", make_axis(xs, false, "round"),
           make_axis(ys, true, "candidates"));
    for (std::size_t i = 0; i < full.size(); ++i) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t k = 0; k < full[i].size(); ++k) {
            pts.emplace_back(static_cast<double>(k), std::max<double>(static_cast<double>(full[i][k]), 1.0));
        }
        p.raw("<g opacity=\"0.25\">");
        p.polyline("run-" + std::to_string(i), pts, "#1f77b4");
        p.raw("</g>\n");
    }
    std::vector<std::pair<double, double>> med;
    for (std::size_t k = 0; k < rounds; ++k) {
        std::vector<std::size_t> col;
        for (const auto& r : full) col.push_back(r[k]);
        std::sort(col.begin(), col.end());
        const auto n = col.size();
        const double m = n % 2 ? static_cast<double>(col[n / 2]) : 0.5 * static_cast<double>(col[n / 2 - 1] + col[n / 2]);
        med.emplace_back(static_cast<double>(k), std::max(m, 1.0));
    }
    if (!med.empty()) p.polyline("median", med, "#d62728");
    return p.str();
}

std::vector<ErrorPoint> sorted_errors(std::vector<ErrorPoint> pts) {
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.quantum_m < b.quantum_m; });
    return pts;
}

std::string error_csv(const std::vector<ErrorPoint>& pts) {
    std::ostringstream out;
    out << "quantum_m,median_error_m,trials\n";
    for (const auto& e : pts) {
        out << text::fmt_double(e.quantum_m) << ',' << text::fmt_double(e.median_error_m) << ',' << e.trials << '\n';
    }
    return out.str();
}

std::string error_svg(const std::vector<ErrorPoint>& pts) {
    std::vector<double> xs, ys;
    bool positive = true;
    for (const auto& e : pts) {
        xs.push_back(e.quantum_m);
        ys.push_back(e.median_error_m);
        positive = positive && e.quantum_m > 0;
    }
    Plot p("error_vs_quantum", "Median localization error against distance quantum",
           make_axis(xs, positive, "quantum (m)"), make_axis(ys, false, "median error (m)"));
    std::vector<std::pair<double, double>> line;
    for (const auto& e : pts) line.emplace_back(e.quantum_m, e.median_error_m);
    p.polyline("median-error", line, "#1f77b4");
    for (const auto& e : pts) p.point("q-" + text::fmt_double(e.quantum_m), e.quantum_m, e.median_error_m, "#1f77b4");
    return p.str();
}

std::string violations_csv(const ViolationReport& r) {
    std::ostringstream out;
    out << "category,activity,events\n";
    for (const auto& [cat, acts] : taxonomy()) {
        for (const auto& a : acts) {
            const auto it = r.activity_events.find(Label{cat, a});
            out << to_string(cat) << ',' << a << ',' << (it == r.activity_events.end() ? 0 : it->second) << '\n';
        }
    }
    return out.str();
}

} // namespace

std::vector<fs::path> emit(const Artifacts& a, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    std::vector<fs::path> written;
    if (!a.runtime.empty()) {
        write_file(out_dir / "runtime.csv", runtime_csv(a.runtime), written);
        write_file(out_dir / "runtime.svg", runtime_svg(a.runtime), written);
    }
    if (a.probe_map) {
        std::ostringstream csv;
        mlat::write_samples_csv(csv, a.probe_map->samples);
        write_file(out_dir / "probes.csv", csv.str(), written);
        write_file(out_dir / "probe_map.svg", probe_svg(*a.probe_map), written);
    }
    if (!a.pool_sizes.empty()) {
        write_file(out_dir / "pool_sizes.csv", pool_csv(a.pool_sizes), written);
        write_file(out_dir / "pool_sizes.svg", pool_svg(a.pool_sizes), written);
    }
    if (!a.error_vs_quantum.empty()) {
        const auto pts = sorted_errors(a.error_vs_quantum);
        write_file(out_dir / "error_vs_quantum.csv", error_csv(pts), written);
        write_file(out_dir / "error_vs_quantum.svg", error_svg(pts), written);
    }
    if (a.violations) write_file(out_dir / "violations.csv", violations_csv(*a.violations), written);
    return written;
}

} // namespace proxsim::report
