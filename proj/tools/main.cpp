#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "loopwatch/detect.hpp"
#include "loopwatch/errors.hpp"
#include "loopwatch/graph.hpp"
#include "loopwatch/poly_matrix.hpp"
#include "loopwatch/report.hpp"
#include "loopwatch/spectral.hpp"

namespace lw = loopwatch;

namespace {

struct Options {
    std::string input;
    std::string coord = "all";
    double z = 2.0;
    std::vector<double> z_list;
    int r_max = -1;
    double tau = lw::kDefaultTau;
    int r = -1;
    std::string suspects;
    std::string surface;
    std::string surface_out;
    std::string corrected_out;
    std::string out;
    std::string format = "json";
};

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

int verdict_rank(lw::Verdict v) {
    switch (v) {
        case lw::Verdict::Clean: return 0;
        case lw::Verdict::Minor: return 1;
        case lw::Verdict::Gross: return 2;
    }
    return 2;
}

lw::Verdict verdict_from_rank(int rank) {
    if (rank <= 0) return lw::Verdict::Clean;
    if (rank == 1) return lw::Verdict::Minor;
    return lw::Verdict::Gross;
}

int verdict_exit(int rank) {
    if (rank <= 0) return 0;
    if (rank == 1) return 2;
    return 3;
}

std::size_t term_budget_from_env() {
    const char* env = std::getenv("LOOPWATCH_TERM_BUDGET");
    if (env == nullptr || *env == '\0') return lw::kDefaultTermBudget;
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0)
        throw lw::UsageError("LOOPWATCH_TERM_BUDGET must be a positive integer, got '" +
                             std::string(env) + "'");
    return static_cast<std::size_t>(v);
}

void require_valid_z(double z) {
    if (!(z > 0.0) || z == 1.0)
        throw lw::UsageError("z must be positive and different from 1, got " + fmt_g(z));
}

std::vector<std::string> coordinates_for(const Options& opt, bool single) {
    if (single) {
        if (opt.coord != "all")
            std::cerr << "note: single-coordinate input; --coord " << opt.coord
                      << " is ignored\n";
        return {"w"};
    }
    if (opt.coord == "all") return {"x", "y", "z"};
    return {opt.coord};
}

lw::Coordinate coord_from_name(const std::string& name) {
    if (name == "y") return lw::Coordinate::Y;
    if (name == "z") return lw::Coordinate::Z;
    return lw::Coordinate::X; // "x"; also "w" files, where the column is fixed
}

struct ComponentRun {
    std::vector<int> vertices; // indices into the parent network
    lw::WeightedDigraph net;
};

std::vector<ComponentRun> split_components(const lw::WeightedDigraph& g,
                                           const std::string& coord_name) {
    std::vector<std::vector<int>> components = lw::weak_components(g);
    if (components.size() > 1)
        std::cerr << "warning: coordinate " << coord_name << ": network is disconnected; "
                  << "analyzing " << components.size() << " components separately\n";
    std::vector<ComponentRun> runs;
    for (auto& c : components) {
        lw::WeightedDigraph sub = lw::subnetwork(g, c);
        runs.push_back({std::move(c), std::move(sub)});
    }
    return runs;
}

nlohmann::ordered_json vertices_json(const lw::WeightedDigraph& g) {
    auto arr = nlohmann::ordered_json::array();
    for (const std::string& label : g.labels()) arr.push_back(label);
    return arr;
}

void emit(const Options& opt, const std::string& content) {
    if (opt.out.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream f(opt.out, std::ios::binary);
    if (!f) throw lw::UsageError("cannot open output file: " + opt.out);
    f << content;
}

nlohmann::ordered_json document_skeleton(const Options& opt, const std::string& command) {
    nlohmann::ordered_json doc;
    doc["schema"] = lw::kReportSchema;
    doc["command"] = command;
    doc["input"] = opt.input;
    doc["coordinates"] = nlohmann::ordered_json::array();
    return doc;
}

// Suspect pairs like "4-5,1-4". A label may itself contain '-', so every
// split of a token is tried against the actual vertex labels.
std::vector<std::pair<std::string, std::string>> parse_suspect_pairs(const std::string& spec) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        pairs.emplace_back(token, std::string{}); // resolved per network later
    }
    if (pairs.empty()) throw lw::UsageError("--suspects is empty");
    return pairs;
}

// Resolves one "u-v" token against a network; returns the arc index or -1
// when neither endpoint pair exists here (the pair may live in another
// component). Throws on ambiguity.
int resolve_suspect_token(const lw::WeightedDigraph& g, const std::string& token) {
    int found = -1;
    for (std::size_t cut = 1; cut + 1 < token.size() + 1; ++cut) {
        if (token[cut] != '-') continue;
        int u = g.find_vertex(token.substr(0, cut));
        int v = g.find_vertex(token.substr(cut + 1));
        if (u < 0 || v < 0) continue;
        int arc = g.find_arc_between(u, v);
        if (arc < 0) continue;
        if (found >= 0 && found != arc)
            throw lw::UsageError("--suspects token '" + token + "' is ambiguous");
        found = arc;
    }
    return found;
}

std::vector<lw::GridSpec> parse_surface_grid(const std::string& spec) {
    std::vector<lw::GridSpec> grid;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        lw::GridSpec g;
        char trailing = 0;
        if (std::sscanf(token.c_str(), "%lf:%lf:%d%c", &g.lo, &g.hi, &g.steps, &trailing) != 3)
            throw lw::UsageError("--surface range '" + token + "' is not lo:hi:steps");
        if (g.steps < 1) throw lw::UsageError("--surface needs steps >= 1");
        grid.push_back(g);
    }
    if (grid.empty()) throw lw::UsageError("--surface is empty");
    return grid;
}

// Builds the error function at the explicit r, or at the smallest power
// from r_lo up that touches every correction variable.
lw::ErrorFunction build_correction_function(const lw::WeightedDigraph& gauged,
                                            const std::vector<int>& suspects, double z,
                                            int explicit_r, int r_lo,
                                            std::size_t term_budget) {
    auto vars_present = [&](const lw::ErrorFunction& f) {
        std::vector<char> seen(suspects.size(), 0);
        for (const auto& t : f.trace_poly().terms())
            for (auto [var, c] : t.exponent.coeffs()) seen[static_cast<std::size_t>(var)] = 1;
        return std::find(seen.begin(), seen.end(), 0) == seen.end();
    };
    if (explicit_r > 0)
        return lw::build_error_function(gauged, suspects, z, explicit_r, term_budget);
    const int r_hi = std::max(gauged.order(), r_lo);
    for (int r = std::max(r_lo, 2); r <= r_hi; ++r) {
        lw::ErrorFunction f = lw::build_error_function(gauged, suspects, z, r, term_budget);
        if (vars_present(f)) return f;
    }
    throw lw::UsageError(
        "suspect arc lies on no closed walk of length r; increase r (tried up to " +
        std::to_string(r_hi) + ")");
}

int cmd_check(const Options& opt) {
    bool single = lw::file_is_single_coordinate(opt.input);
    std::vector<double> zs = opt.z_list.empty() ? std::vector<double>{opt.z} : opt.z_list;
    for (double z : zs) require_valid_z(z);

    nlohmann::ordered_json doc = document_skeleton(opt, "check");
    std::ostringstream text;
    int worst = 0;
    for (const std::string& coord_name : coordinates_for(opt, single)) {
        lw::WeightedDigraph g = lw::load_network_file(opt.input, coord_from_name(coord_name));
        nlohmann::ordered_json jcoord;
        jcoord["coordinate"] = coord_name;
        jcoord["components"] = nlohmann::ordered_json::array();
        for (const ComponentRun& run : split_components(g, coord_name)) {
            nlohmann::ordered_json jcomp;
            jcomp["vertices"] = vertices_json(run.net);
            jcomp["checks"] = nlohmann::ordered_json::array();
            for (double z : zs) {
                lw::DiagnosticsReport report = lw::detect(run.net, z, opt.r_max, opt.tau);
                worst = std::max(worst, verdict_rank(report.verdict));
                jcomp["checks"].push_back(lw::to_json(report));
                text << "== coordinate " << coord_name << ", " << run.net.order()
                     << " vertices, z=" << fmt_g(z) << " ==\n"
                     << lw::render_text(report);
            }
            jcoord["components"].push_back(std::move(jcomp));
        }
        doc["coordinates"].push_back(std::move(jcoord));
    }
    doc["verdict"] = lw::to_string(verdict_from_rank(worst));
    text << "overall verdict: " << lw::to_string(verdict_from_rank(worst)) << "\n";
    emit(opt, opt.format == "text" ? text.str() : doc.dump(2) + "\n");
    return verdict_exit(worst);
}

int cmd_spectrum(const Options& opt) {
    bool single = lw::file_is_single_coordinate(opt.input);
    require_valid_z(opt.z);

    nlohmann::ordered_json doc = document_skeleton(opt, "spectrum");
    std::ostringstream text;
    int worst = 0;
    for (const std::string& coord_name : coordinates_for(opt, single)) {
        lw::WeightedDigraph g = lw::load_network_file(opt.input, coord_from_name(coord_name));
        nlohmann::ordered_json jcoord;
        jcoord["coordinate"] = coord_name;
        jcoord["components"] = nlohmann::ordered_json::array();
        for (const ComponentRun& run : split_components(g, coord_name)) {
            lw::WeightedDigraph gauged = lw::gauge_fix(run.net).first;
            lw::Spectrum at_z = lw::spectrum(gauged, opt.z);
            lw::Spectrum at_one = lw::spectrum(gauged, 1.0);
            double deviation = (at_z.eigenvalues - at_one.eigenvalues).lpNorm<1>();
            lw::DiagnosticsReport report = lw::detect(run.net, opt.z, opt.r_max, opt.tau);
            worst = std::max(worst, verdict_rank(report.verdict));

            nlohmann::ordered_json jcomp;
            jcomp["vertices"] = vertices_json(run.net);
            nlohmann::ordered_json jspec = lw::to_json(at_z);
            jspec["deviation_from_z1"] = lw::json_number(deviation);
            jcomp["spectrum"] = std::move(jspec);
            jcomp["spectrum_z1"] = lw::to_json(at_one);
            jcomp["check"] = lw::to_json(report);
            jcoord["components"].push_back(std::move(jcomp));

            text << "== coordinate " << coord_name << ", " << run.net.order()
                 << " vertices ==\n"
                 << lw::render_text(at_z, at_one, deviation);
        }
        doc["coordinates"].push_back(std::move(jcoord));
    }
    doc["verdict"] = lw::to_string(verdict_from_rank(worst));
    emit(opt, opt.format == "text" ? text.str() : doc.dump(2) + "\n");
    return verdict_exit(worst);
}

int cmd_correct(const Options& opt) {
    bool single = lw::file_is_single_coordinate(opt.input);
    require_valid_z(opt.z);
    std::size_t term_budget = term_budget_from_env();

    std::vector<std::string> suspect_tokens;
    if (!opt.suspects.empty()) {
        for (const auto& [token, unused] : parse_suspect_pairs(opt.suspects))
            suspect_tokens.push_back(token);
    }
    std::optional<std::vector<lw::GridSpec>> surface_grid;
    if (!opt.surface.empty()) surface_grid = parse_surface_grid(opt.surface);

    std::vector<std::string> coords = coordinates_for(opt, single);
    if (surface_grid && coords.size() > 1)
        throw lw::UsageError("--surface needs a single coordinate; pass --coord x|y|z");

    // Full networks per coordinate, for the corrected CSV at the end.
    std::vector<lw::WeightedDigraph> full;
    std::vector<std::vector<double>> corrected_weights;
    std::vector<std::string> all_coords =
        single ? std::vector<std::string>{"w"} : std::vector<std::string>{"x", "y", "z"};
    for (const std::string& name : all_coords) {
        full.push_back(lw::load_network_file(opt.input, coord_from_name(name)));
        std::vector<double> w;
        for (const lw::Arc& a : full.back().arcs()) w.push_back(a.weight);
        corrected_weights.push_back(std::move(w));
    }

    nlohmann::ordered_json doc = document_skeleton(opt, "correct");
    std::ostringstream text;
    int worst = 0;
    bool surface_written = false;
    std::string surface_path =
        opt.surface_out.empty() ? opt.input + ".surface.csv" : opt.surface_out;

    for (const std::string& coord_name : coords) {
        std::size_t coord_slot = 0;
        for (std::size_t i = 0; i < all_coords.size(); ++i)
            if (all_coords[i] == coord_name) coord_slot = i;
        const lw::WeightedDigraph& g = full[coord_slot];

        // Every named suspect must exist somewhere in this coordinate.
        for (const std::string& token : suspect_tokens) {
            if (resolve_suspect_token(g, token) < 0)
                throw lw::UsageError("--suspects pair '" + token +
                                     "' is not a measured baseline");
        }

        nlohmann::ordered_json jcoord;
        jcoord["coordinate"] = coord_name;
        jcoord["components"] = nlohmann::ordered_json::array();
        for (const ComponentRun& run : split_components(g, coord_name)) {
            nlohmann::ordered_json jcomp;
            jcomp["vertices"] = vertices_json(run.net);
            text << "== coordinate " << coord_name << ", " << run.net.order()
                 << " vertices ==\n";

            std::vector<int> suspects;
            for (const std::string& token : suspect_tokens) {
                int arc = resolve_suspect_token(run.net, token);
                if (arc >= 0) suspects.push_back(arc);
            }
            lw::DiagnosticsReport report = lw::detect(run.net, opt.z, opt.r_max, opt.tau);
            jcomp["pre"] = lw::to_json(report);
            if (suspects.empty()) {
                if (report.verdict == lw::Verdict::Clean) {
                    jcomp["skipped"] = "clean; nothing to correct";
                    text << "clean; nothing to correct\n";
                    jcoord["components"].push_back(std::move(jcomp));
                    continue;
                }
                suspects = lw::rank_suspect_arcs(run.net, report, 2);
            }

            lw::WeightedDigraph gauged = lw::gauge_fix(run.net).first;
            lw::ErrorFunction f =
                build_correction_function(gauged, suspects, opt.z, opt.r,
                                          report.first_failing_r.value_or(2), term_budget);
            lw::CorrectionResult result = lw::minimize_error(f);
            worst = std::max(worst, verdict_rank(result.post_report.verdict));

            // Quote and persist weights of the original network, not the
            // gauged one the minimizer ran on.
            lw::WeightedDigraph corrected = lw::apply_corrections(
                run.net, suspects,
                {result.x_star.data(), static_cast<std::size_t>(result.x_star.size())});
            for (int i = 0; i < corrected.size(); ++i) {
                const lw::Arc& a = corrected.arc(i);
                int parent = g.find_arc_between(g.find_vertex(corrected.label(a.tail)),
                                                g.find_vertex(corrected.label(a.head)));
                corrected_weights[coord_slot][static_cast<std::size_t>(parent)] = a.weight;
            }

            jcomp["r"] = f.r();
            jcomp["correction"] = lw::to_json(result, corrected);
            text << "r: " << f.r() << "\n" << lw::render_text(result, corrected);

            if (surface_grid) {
                if (surface_written)
                    throw lw::UsageError("--surface needs a single connected network");
                std::vector<lw::SurfaceSample> samples =
                    lw::sample_error_surface(f, *surface_grid);
                std::ofstream sf(surface_path, std::ios::binary);
                if (!sf) throw lw::UsageError("cannot open surface file: " + surface_path);
                lw::write_surface_csv(sf, samples);
                jcomp["surface_csv"] = surface_path;
                surface_written = true;
            }
            jcoord["components"].push_back(std::move(jcomp));
        }
        doc["coordinates"].push_back(std::move(jcoord));
    }

    std::string corrected_path =
        opt.corrected_out.empty() ? opt.input + ".corrected.csv" : opt.corrected_out;
    std::ofstream cf(corrected_path, std::ios::binary);
    if (!cf) throw lw::UsageError("cannot open corrected file: " + corrected_path);
    const lw::WeightedDigraph& base = full[0];
    if (single) {
        cf << "from,to,w\n";
        for (int i = 0; i < base.size(); ++i) {
            const lw::Arc& a = base.arc(i);
            cf << base.label(a.tail) << "," << base.label(a.head) << ","
               << fmt_g(corrected_weights[0][static_cast<std::size_t>(i)]) << "\n";
        }
    } else {
        cf << "from,to,dx,dy,dz\n";
        for (int i = 0; i < base.size(); ++i) {
            const lw::Arc& a = base.arc(i);
            cf << base.label(a.tail) << "," << base.label(a.head);
            for (std::size_t cidx = 0; cidx < 3; ++cidx)
                cf << "," << fmt_g(corrected_weights[cidx][static_cast<std::size_t>(i)]);
            cf << "\n";
        }
    }

    doc["corrected_csv"] = corrected_path;
    doc["verdict"] = lw::to_string(verdict_from_rank(worst));
    text << "corrected baselines written to " << corrected_path << "\n";
    text << "overall verdict: " << lw::to_string(verdict_from_rank(worst)) << "\n";
    emit(opt, opt.format == "text" ? text.str() : doc.dump(2) + "\n");
    return verdict_exit(worst);
}

int cmd_oracle(const Options& opt) {
    bool single = lw::file_is_single_coordinate(opt.input);
    std::size_t term_budget = term_budget_from_env();
    const int r_max = opt.r_max < 0 ? 4 : opt.r_max;

    nlohmann::ordered_json doc = document_skeleton(opt, "oracle");
    std::ostringstream text;
    bool all_ok = true;
    for (const std::string& coord_name : coordinates_for(opt, single)) {
        lw::WeightedDigraph g = lw::load_network_file(opt.input, coord_from_name(coord_name));
        nlohmann::ordered_json jcoord;
        jcoord["coordinate"] = coord_name;
        jcoord["powers"] = nlohmann::ordered_json::array();
        text << "== coordinate " << coord_name << " ==\n";
        for (int r = 1; r <= r_max; ++r) {
            lw::OracleReport report = lw::oracle_check(g, r, {}, term_budget);
            all_ok = all_ok && report.ok();
            jcoord["powers"].push_back(lw::to_json(report));
            for (int u = 0; u < g.order(); ++u) {
                for (int v = 0; v < g.order(); ++v) {
                    bool pair_ok = true;
                    for (const auto& m : report.mismatches)
                        if (m.u == u && m.v == v) pair_ok = false;
                    text << "r=" << r << " " << g.label(u) << "->" << g.label(v) << ": "
                         << (pair_ok ? "pass" : "FAIL") << "\n";
                }
            }
            text << lw::render_text(report);
        }
        doc["coordinates"].push_back(std::move(jcoord));
    }
    doc["ok"] = all_ok;
    text << (all_ok ? "oracle: all powers match\n" : "oracle: MISMATCH\n");
    emit(opt, opt.format == "text" ? text.str() : doc.dump(2) + "\n");
    return all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"loop-law diagnostics and gross-error correction for GPS baseline networks"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("input", opt.input, "baseline CSV (from,to,dx,dy,dz or from,to,w)")
            ->required();
        sub->add_option("--coord", opt.coord, "coordinate to analyze: x, y, z, or all")
            ->check(CLI::IsMember({"x", "y", "z", "all"}));
        sub->add_option("--out", opt.out, "write the report to this file instead of stdout");
        sub->add_option("--format", opt.format, "report format: json or text")
            ->check(CLI::IsMember({"json", "text"}));
    };
    auto add_analysis = [&](CLI::App* sub) {
        sub->add_option("--z", opt.z, "evaluation base (default 2; z > 0, z != 1)");
        sub->add_option("--rmax", opt.r_max, "largest power to test (default: network order)");
        sub->add_option("--tau", opt.tau, "gross-error threshold in meters (default 0.01)");
    };

    CLI::App* check = app.add_subcommand("check", "test the loop law power by power");
    add_common(check);
    add_analysis(check);
    check->add_option("--z-list", opt.z_list, "check at several z values")->delimiter(',');

    CLI::App* spectrum = app.add_subcommand("spectrum", "compare spectra at z and at 1");
    add_common(spectrum);
    add_analysis(spectrum);

    CLI::App* correct = app.add_subcommand("correct", "fit corrections on suspect arcs");
    add_common(correct);
    add_analysis(correct);
    correct->add_option("--suspects", opt.suspects,
                        "comma-separated vertex pairs, e.g. 4-5,1-4 (default: top 2 ranked)");
    correct->add_option("--r", opt.r, "power for the error function (default: first failing r)");
    correct->add_option("--surface", opt.surface,
                        "sample e on a grid, lo:hi:steps per suspect arc");
    correct->add_option("--surface-out", opt.surface_out,
                        "surface CSV path (default: <input>.surface.csv)");
    correct->add_option("--corrected-out", opt.corrected_out,
                        "corrected baseline CSV path (default: <input>.corrected.csv)");

    CLI::App* oracle = app.add_subcommand("oracle",
                                          "cross-check matrix powers against walk enumeration");
    add_common(oracle);
    oracle->add_option("--rmax", opt.r_max, "largest power to cross-check (default 4, max 8)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (opt.tau <= 0.0) throw lw::UsageError("--tau must be positive");
        if (check->parsed()) return cmd_check(opt);
        if (spectrum->parsed()) return cmd_spectrum(opt);
        if (correct->parsed()) return cmd_correct(opt);
        if (oracle->parsed()) return cmd_oracle(opt);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
