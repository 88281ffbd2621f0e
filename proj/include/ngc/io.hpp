#pragma once

// File formats and (de)serialization. All writers render the full document
// in memory and publish it with write-to-temp + atomic rename, so failed
// runs never leave partial files. Doubles are written in shortest
// round-trip form and parsed exactly, which makes every writer byte-stable
// for identical inputs.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "ngc/clstm.hpp"
#include "ngc/cmlp.hpp"
#include "ngc/eval.hpp"
#include "ngc/granger.hpp"
#include "ngc/nn_core.hpp"
#include "ngc/panel.hpp"

namespace ngc {

inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw std::invalid_argument(context + ": not a number: '" + s + "'");
    return v;
}

inline long parse_long(const std::string& s, const std::string& context) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument(context + ": not an integer: '" + s + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

/// Publishes content atomically: write a sibling temp file, then rename over
/// the target.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("rename failed for: " + path.string());
    }
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

// ---------------------------------------------------------------------------
// Panel CSV: comma separated, header row of series names, optional
// "replicate" column whose value changes mark replicate boundaries.
// ---------------------------------------------------------------------------

inline TimeSeriesPanel load_panel_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw std::invalid_argument(path.string() + ": empty file");
    const std::vector<std::string> header = split(lines[0], ',');
    std::optional<std::size_t> rep_col;
    std::vector<std::string> names;
    std::vector<std::size_t> value_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "replicate" && !rep_col) {
            rep_col = c;
        } else {
            names.push_back(header[c]);
            value_cols.push_back(c);
        }
    }
    if (names.empty()) throw std::invalid_argument(path.string() + ": no series columns");

    TimeSeriesPanel panel;
    panel.names = names;
    Matrix current(0, names.size());
    std::vector<double> row(names.size());
    std::string rep_value;
    bool have_rows = false;
    auto flush = [&] {
        if (current.rows > 0) panel.replicates.push_back(std::move(current));
        current = Matrix(0, names.size());
    };
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty()) continue;
        const std::vector<std::string> cells = split(lines[r], ',');
        if (cells.size() != header.size())
            throw std::invalid_argument(path.string() + ": row " + std::to_string(r + 1) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(header.size()));
        if (rep_col && cells[*rep_col] != rep_value) {
            flush();
            rep_value = cells[*rep_col];
        }
        for (std::size_t c = 0; c < value_cols.size(); ++c)
            row[c] = parse_double(cells[value_cols[c]],
                                  path.string() + ": row " + std::to_string(r + 1) + ", column " +
                                      header[value_cols[c]]);
        current.data.insert(current.data.end(), row.begin(), row.end());
        current.rows += 1;
        have_rows = true;
    }
    flush();
    if (!have_rows) throw std::invalid_argument(path.string() + ": empty panel");
    panel.validate();
    return panel;
}

inline void save_panel_csv(const TimeSeriesPanel& panel, const std::filesystem::path& path) {
    panel.validate();
    std::string out;
    const bool with_rep = panel.replicates.size() > 1;
    if (with_rep) out += "replicate,";
    for (std::size_t j = 0; j < panel.names.size(); ++j) {
        if (j) out += ',';
        out += panel.names[j];
    }
    out += '\n';
    for (std::size_t r = 0; r < panel.replicates.size(); ++r) {
        const Matrix& rep = panel.replicates[r];
        for (std::size_t t = 0; t < rep.rows; ++t) {
            if (with_rep) {
                out += std::to_string(r + 1);
                out += ',';
            }
            for (std::size_t j = 0; j < rep.cols; ++j) {
                if (j) out += ',';
                out += format_double(rep(t, j));
            }
            out += '\n';
        }
    }
    atomic_write(path, out);
}

// ---------------------------------------------------------------------------
// DREAM3-style TSV: tab separated, "Time" first column, replicate boundaries
// wherever the time value decreases. The time column is validated for equal
// spacing and dropped.
// ---------------------------------------------------------------------------

inline TimeSeriesPanel load_dream3_tsv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw std::invalid_argument(path.string() + ": empty file");
    const std::vector<std::string> header = split(lines[0], '\t');
    if (header.empty() || header[0] != "Time")
        throw std::invalid_argument(path.string() + ": first column must be named 'Time'");
    const std::size_t p = header.size() - 1;
    if (p == 0) throw std::invalid_argument(path.string() + ": no series columns");

    TimeSeriesPanel panel;
    panel.names.assign(header.begin() + 1, header.end());
    Matrix current(0, p);
    std::vector<double> times;
    auto flush = [&] {
        if (current.rows == 0) return;
        for (std::size_t t = 2; t < times.size(); ++t) {
            const double d0 = times[1] - times[0];
            const double dt = times[t] - times[t - 1];
            if (std::abs(dt - d0) > 1e-9 * std::max(1.0, std::abs(d0))) {
                std::cerr << "warning: " << path.string() << ": unequal time spacing within replicate "
                          << panel.replicates.size() + 1 << "\n";
                break;
            }
        }
        panel.replicates.push_back(std::move(current));
        current = Matrix(0, p);
        times.clear();
    };
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty()) continue;
        const std::vector<std::string> cells = split(lines[r], '\t');
        if (cells.size() != header.size())
            throw std::invalid_argument(path.string() + ": row " + std::to_string(r + 1) +
                                        " has wrong cell count");
        const double time = parse_double(cells[0], path.string() + ": Time, row " + std::to_string(r + 1));
        if (!times.empty() && time < times.back()) flush();
        times.push_back(time);
        for (std::size_t j = 0; j < p; ++j)
            current.data.push_back(parse_double(cells[j + 1], path.string() + ": row " +
                                                                  std::to_string(r + 1) + ", column " +
                                                                  header[j + 1]));
        current.rows += 1;
    }
    flush();
    if (panel.replicates.empty()) throw std::invalid_argument(path.string() + ": empty panel");
    for (std::size_t r = 1; r < panel.replicates.size(); ++r)
        if (panel.replicates[r].rows != panel.replicates[0].rows) {
            std::cerr << "warning: " << path.string() << ": replicate lengths differ ("
                      << panel.replicates[0].rows << " vs " << panel.replicates[r].rows << ")\n";
            break;
        }
    panel.validate();
    return panel;
}

// ---------------------------------------------------------------------------
// Graph files.
// ---------------------------------------------------------------------------

namespace detail {

inline void append_names_line(std::string& out, const std::vector<std::string>& names) {
    out += "names";
    for (const auto& n : names) {
        out += '\t';
        out += n;
    }
    out += '\n';
}

inline void append_graph_body(std::string& out, const GrangerGraph& g) {
    out += "p " + std::to_string(g.p) + '\n';
    append_names_line(out, g.names);
    out += "edge_stats\n";
    for (std::size_t i = 0; i < g.p; ++i) {
        for (std::size_t j = 0; j < g.p; ++j) {
            if (j) out += '\t';
            out += format_double(g.edge_stats(i, j));
        }
        out += '\n';
    }
    out += "adjacency\n";
    for (std::size_t i = 0; i < g.p; ++i) {
        for (std::size_t j = 0; j < g.p; ++j) {
            if (j) out += '\t';
            out += g.adjacency[i * g.p + j] ? '1' : '0';
        }
        out += '\n';
    }
    out += "selected_lag\n";
    for (std::size_t i = 0; i < g.p; ++i) {
        for (std::size_t j = 0; j < g.p; ++j) {
            if (j) out += '\t';
            out += std::to_string(g.selected_lag[i * g.p + j]);
        }
        out += '\n';
    }
}

struct LineCursor {
    const std::vector<std::string>* lines;
    std::size_t pos = 0;
    std::string context;

    const std::string& next() {
        if (pos >= lines->size()) throw std::invalid_argument(context + ": unexpected end of file");
        return (*lines)[pos++];
    }
    void expect(const std::string& tag) {
        const std::string& line = next();
        if (line != tag)
            throw std::invalid_argument(context + ": expected '" + tag + "', got '" + line + "'");
    }
};

inline GrangerGraph parse_graph_body(LineCursor& cur) {
    const std::vector<std::string> phead = split(cur.next(), ' ');
    if (phead.size() != 2 || phead[0] != "p")
        throw std::invalid_argument(cur.context + ": expected 'p <count>'");
    const std::size_t p = static_cast<std::size_t>(parse_long(phead[1], cur.context));
    std::vector<std::string> names = split(cur.next(), '\t');
    if (names.empty() || names[0] != "names" || names.size() != p + 1)
        throw std::invalid_argument(cur.context + ": bad names line");
    names.erase(names.begin());
    GrangerGraph g = make_empty_graph(names);
    cur.expect("edge_stats");
    for (std::size_t i = 0; i < p; ++i) {
        const auto cells = split(cur.next(), '\t');
        if (cells.size() != p) throw std::invalid_argument(cur.context + ": ragged edge_stats row");
        for (std::size_t j = 0; j < p; ++j)
            g.edge_stats(i, j) = parse_double(cells[j], cur.context + ": edge_stats");
    }
    cur.expect("adjacency");
    for (std::size_t i = 0; i < p; ++i) {
        const auto cells = split(cur.next(), '\t');
        if (cells.size() != p) throw std::invalid_argument(cur.context + ": ragged adjacency row");
        for (std::size_t j = 0; j < p; ++j)
            g.adjacency[i * p + j] = static_cast<std::uint8_t>(parse_long(cells[j], cur.context));
    }
    cur.expect("selected_lag");
    for (std::size_t i = 0; i < p; ++i) {
        const auto cells = split(cur.next(), '\t');
        if (cells.size() != p) throw std::invalid_argument(cur.context + ": ragged selected_lag row");
        for (std::size_t j = 0; j < p; ++j)
            g.selected_lag[i * p + j] = static_cast<int>(parse_long(cells[j], cur.context));
    }
    validate_graph(g);
    return g;
}

}  // namespace detail

inline void save_graph(const GrangerGraph& g, const std::filesystem::path& path) {
    validate_graph(g);
    std::string out = "ngc-graph v1\n";
    detail::append_graph_body(out, g);
    atomic_write(path, out);
}

inline GrangerGraph load_graph(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    detail::LineCursor cur{&lines, 0, path.string()};
    cur.expect("ngc-graph v1");
    return detail::parse_graph_body(cur);
}

inline void save_standardized_graph(const StandardizedGraph& g, const std::filesystem::path& path) {
    std::string out = "ngc-stdgraph v1\n";
    out += "groups " + std::to_string(g.group_names.size()) + '\n';
    detail::append_names_line(out, g.group_names);
    out += "raw " + std::to_string(g.raw_names.size()) + '\n';
    detail::append_names_line(out, g.raw_names);
    out += "group_of";
    for (auto idx : g.group_of) out += '\t' + std::to_string(idx);
    out += "\nedge_weights\n";
    for (std::size_t i = 0; i < g.group_names.size(); ++i) {
        for (std::size_t j = 0; j < g.group_names.size(); ++j) {
            if (j) out += '\t';
            out += format_double(g.edge_weights(i, j));
        }
        out += '\n';
    }
    atomic_write(path, out);
}

inline StandardizedGraph load_standardized_graph(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    detail::LineCursor cur{&lines, 0, path.string()};
    cur.expect("ngc-stdgraph v1");
    StandardizedGraph g;
    const auto ghead = split(cur.next(), ' ');
    if (ghead.size() != 2 || ghead[0] != "groups")
        throw std::invalid_argument(path.string() + ": expected 'groups <count>'");
    const std::size_t ng = static_cast<std::size_t>(parse_long(ghead[1], path.string()));
    auto gnames = split(cur.next(), '\t');
    if (gnames.size() != ng + 1 || gnames[0] != "names")
        throw std::invalid_argument(path.string() + ": bad group names");
    g.group_names.assign(gnames.begin() + 1, gnames.end());
    const auto rhead = split(cur.next(), ' ');
    if (rhead.size() != 2 || rhead[0] != "raw")
        throw std::invalid_argument(path.string() + ": expected 'raw <count>'");
    const std::size_t p = static_cast<std::size_t>(parse_long(rhead[1], path.string()));
    auto rnames = split(cur.next(), '\t');
    if (rnames.size() != p + 1 || rnames[0] != "names")
        throw std::invalid_argument(path.string() + ": bad raw names");
    g.raw_names.assign(rnames.begin() + 1, rnames.end());
    auto gof = split(cur.next(), '\t');
    if (gof.size() != p + 1 || gof[0] != "group_of")
        throw std::invalid_argument(path.string() + ": bad group_of line");
    for (std::size_t j = 0; j < p; ++j)
        g.group_of.push_back(static_cast<std::size_t>(parse_long(gof[j + 1], path.string())));
    cur.expect("edge_weights");
    g.edge_weights = Matrix(ng, ng);
    for (std::size_t i = 0; i < ng; ++i) {
        const auto cells = split(cur.next(), '\t');
        if (cells.size() != ng) throw std::invalid_argument(path.string() + ": ragged edge_weights");
        for (std::size_t j = 0; j < ng; ++j)
            g.edge_weights(i, j) = parse_double(cells[j], path.string() + ": edge_weights");
    }
    return g;
}

// ---------------------------------------------------------------------------
// Sweep and curve files.
// ---------------------------------------------------------------------------

inline void save_sweep(const SweepResult& sweep, const std::filesystem::path& path) {
    std::string out = "ngc-sweep v1\n";
    out += "lambdas " + std::to_string(sweep.lambdas.size());
    for (double l : sweep.lambdas) out += '\t' + format_double(l);
    out += '\n';
    out += "include_diagonal ";
    out += sweep.include_diagonal ? '1' : '0';
    out += '\n';
    out += "graphs " + std::to_string(sweep.per_lambda.size()) + '\n';
    for (const auto& g : sweep.per_lambda) detail::append_graph_body(out, g);
    out += "iterations " + std::to_string(sweep.iterations.size()) + '\n';
    for (const auto& row : sweep.iterations) {
        for (std::size_t s = 0; s < row.size(); ++s) {
            if (s) out += '\t';
            out += std::to_string(row[s]);
        }
        out += '\n';
    }
    atomic_write(path, out);
}

inline SweepResult load_sweep(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    detail::LineCursor cur{&lines, 0, path.string()};
    cur.expect("ngc-sweep v1");
    SweepResult sweep;
    const auto lhead = split(cur.next(), '\t');
    const auto lcount = split(lhead[0], ' ');
    if (lcount.size() != 2 || lcount[0] != "lambdas")
        throw std::invalid_argument(path.string() + ": expected 'lambdas <count>'");
    const std::size_t n = static_cast<std::size_t>(parse_long(lcount[1], path.string()));
    if (lhead.size() != n + 1) throw std::invalid_argument(path.string() + ": lambda count mismatch");
    for (std::size_t i = 0; i < n; ++i)
        sweep.lambdas.push_back(parse_double(lhead[i + 1], path.string() + ": lambdas"));
    const auto dflag = split(cur.next(), ' ');
    if (dflag.size() != 2 || dflag[0] != "include_diagonal")
        throw std::invalid_argument(path.string() + ": expected 'include_diagonal 0|1'");
    sweep.include_diagonal = parse_long(dflag[1], path.string()) != 0;
    const auto ghead = split(cur.next(), ' ');
    if (ghead.size() != 2 || ghead[0] != "graphs")
        throw std::invalid_argument(path.string() + ": expected 'graphs <count>'");
    const std::size_t gn = static_cast<std::size_t>(parse_long(ghead[1], path.string()));
    for (std::size_t i = 0; i < gn; ++i) sweep.per_lambda.push_back(detail::parse_graph_body(cur));
    const auto ihead = split(cur.next(), ' ');
    if (ihead.size() != 2 || ihead[0] != "iterations")
        throw std::invalid_argument(path.string() + ": expected 'iterations <count>'");
    const std::size_t in = static_cast<std::size_t>(parse_long(ihead[1], path.string()));
    for (std::size_t i = 0; i < in; ++i) {
        const auto cells = split(cur.next(), '\t');
        std::vector<std::size_t> row;
        for (const auto& c : cells) row.push_back(static_cast<std::size_t>(parse_long(c, path.string())));
        sweep.iterations.push_back(std::move(row));
    }
    return sweep;
}

inline void save_curves(const CurveSummary& c, const std::filesystem::path& path) {
    std::string out = "ngc-curves v1\n";
    out += "auroc " + format_double(c.auroc) + '\n';
    out += "aupr " + format_double(c.aupr) + '\n';
    out += "roc " + std::to_string(c.roc_points.size()) + '\n';
    for (const auto& [fpr, tpr] : c.roc_points)
        out += format_double(fpr) + '\t' + format_double(tpr) + '\n';
    out += "pr " + std::to_string(c.pr_points.size()) + '\n';
    for (const auto& [recall, precision] : c.pr_points)
        out += format_double(recall) + '\t' + format_double(precision) + '\n';
    atomic_write(path, out);
}

inline CurveSummary load_curves(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    detail::LineCursor cur{&lines, 0, path.string()};
    cur.expect("ngc-curves v1");
    CurveSummary c;
    const auto aline = split(cur.next(), ' ');
    if (aline.size() != 2 || aline[0] != "auroc")
        throw std::invalid_argument(path.string() + ": expected 'auroc <value>'");
    c.auroc = parse_double(aline[1], path.string());
    const auto pline = split(cur.next(), ' ');
    if (pline.size() != 2 || pline[0] != "aupr")
        throw std::invalid_argument(path.string() + ": expected 'aupr <value>'");
    c.aupr = parse_double(pline[1], path.string());
    const auto rhead = split(cur.next(), ' ');
    if (rhead.size() != 2 || rhead[0] != "roc")
        throw std::invalid_argument(path.string() + ": expected 'roc <count>'");
    for (long i = 0; i < parse_long(rhead[1], path.string()); ++i) {
        const auto cells = split(cur.next(), '\t');
        if (cells.size() != 2) throw std::invalid_argument(path.string() + ": bad roc point");
        c.roc_points.emplace_back(parse_double(cells[0], path.string()),
                                  parse_double(cells[1], path.string()));
    }
    const auto phead = split(cur.next(), ' ');
    if (phead.size() != 2 || phead[0] != "pr")
        throw std::invalid_argument(path.string() + ": expected 'pr <count>'");
    for (long i = 0; i < parse_long(phead[1], path.string()); ++i) {
        const auto cells = split(cur.next(), '\t');
        if (cells.size() != 2) throw std::invalid_argument(path.string() + ": bad pr point");
        c.pr_points.emplace_back(parse_double(cells[0], path.string()),
                                 parse_double(cells[1], path.string()));
    }
    return c;
}

// ---------------------------------------------------------------------------
// Model files: dims plus the canonical flat parameter dump, enough for warm
// starts across processes. Optional per-series scaling records how the
// training panel was standardized.
// ---------------------------------------------------------------------------

namespace detail {

inline void append_flat_params(std::string& out, const Vector& flat) {
    out += "params " + std::to_string(flat.size()) + '\n';
    for (std::size_t i = 0; i < flat.size(); ++i) {
        out += format_double(flat[i]);
        out += (i + 1) % 8 == 0 || i + 1 == flat.size() ? '\n' : '\t';
    }
}

inline Vector parse_flat_params(LineCursor& cur) {
    const auto head = split(cur.next(), ' ');
    if (head.size() != 2 || head[0] != "params")
        throw std::invalid_argument(cur.context + ": expected 'params <count>'");
    const std::size_t n = static_cast<std::size_t>(parse_long(head[1], cur.context));
    Vector flat;
    flat.reserve(n);
    while (flat.size() < n) {
        for (const auto& cell : split(cur.next(), '\t'))
            flat.push_back(parse_double(cell, cur.context + ": params"));
    }
    if (flat.size() != n) throw std::invalid_argument(cur.context + ": params count mismatch");
    return flat;
}

inline void append_scaling(std::string& out, const PanelScaling& scaling) {
    out += "scaling_mean";
    for (double v : scaling.mean) out += '\t' + format_double(v);
    out += "\nscaling_std";
    for (double v : scaling.std) out += '\t' + format_double(v);
    out += '\n';
}

}  // namespace detail

inline void save_cmlp_models(const std::vector<CmlpNet>& models,
                             const std::vector<std::string>& names,
                             const std::filesystem::path& path,
                             const PanelScaling* scaling = nullptr) {
    if (models.empty()) throw std::invalid_argument("save_cmlp_models: no models");
    std::string out = "ngc-models v1\n";
    out += "family cmlp\n";
    out += "count " + std::to_string(models.size()) + '\n';
    detail::append_names_line(out, names);
    if (scaling) detail::append_scaling(out, *scaling);
    for (std::size_t i = 0; i < models.size(); ++i) {
        const CmlpNet& m = models[i];
        out += "model " + std::to_string(i) + " p " + std::to_string(m.p) + " lag " +
               std::to_string(m.lag) + " hidden " + std::to_string(m.hidden) + " layers " +
               std::to_string(m.layers) + " activation " + to_string(m.activation) + '\n';
        detail::append_flat_params(out, cmlp_flatten(m));
    }
    atomic_write(path, out);
}

inline void save_clstm_models(const std::vector<ClstmNet>& models,
                              const std::vector<std::string>& names,
                              const std::filesystem::path& path,
                              const PanelScaling* scaling = nullptr) {
    if (models.empty()) throw std::invalid_argument("save_clstm_models: no models");
    std::string out = "ngc-models v1\n";
    out += "family clstm\n";
    out += "count " + std::to_string(models.size()) + '\n';
    detail::append_names_line(out, names);
    if (scaling) detail::append_scaling(out, *scaling);
    for (std::size_t i = 0; i < models.size(); ++i) {
        const ClstmNet& m = models[i];
        out += "model " + std::to_string(i) + " p " + std::to_string(m.p) + " hidden " +
               std::to_string(m.hidden) + '\n';
        detail::append_flat_params(out, clstm_flatten(m));
    }
    atomic_write(path, out);
}

struct LoadedModels {
    ModelFamily family = ModelFamily::Cmlp;
    std::vector<std::string> names;
    std::vector<CmlpNet> cmlp;
    std::vector<ClstmNet> clstm;
    std::optional<PanelScaling> scaling;
};

inline LoadedModels load_models(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    detail::LineCursor cur{&lines, 0, path.string()};
    cur.expect("ngc-models v1");
    LoadedModels out;
    const auto fam = split(cur.next(), ' ');
    if (fam.size() != 2 || fam[0] != "family")
        throw std::invalid_argument(path.string() + ": expected 'family <name>'");
    out.family = model_family_from_string(fam[1]);
    const auto count_line = split(cur.next(), ' ');
    if (count_line.size() != 2 || count_line[0] != "count")
        throw std::invalid_argument(path.string() + ": expected 'count <n>'");
    const std::size_t count = static_cast<std::size_t>(parse_long(count_line[1], path.string()));
    auto names = split(cur.next(), '\t');
    if (names.empty() || names[0] != "names")
        throw std::invalid_argument(path.string() + ": bad names line");
    out.names.assign(names.begin() + 1, names.end());

    if (cur.pos < lines.size() && lines[cur.pos].rfind("scaling_mean", 0) == 0) {
        PanelScaling s;
        auto mean = split(cur.next(), '\t');
        for (std::size_t j = 1; j < mean.size(); ++j)
            s.mean.push_back(parse_double(mean[j], path.string() + ": scaling_mean"));
        auto sd = split(cur.next(), '\t');
        if (sd.empty() || sd[0] != "scaling_std")
            throw std::invalid_argument(path.string() + ": expected scaling_std after scaling_mean");
        for (std::size_t j = 1; j < sd.size(); ++j)
            s.std.push_back(parse_double(sd[j], path.string() + ": scaling_std"));
        out.scaling = std::move(s);
    }

    for (std::size_t i = 0; i < count; ++i) {
        const auto head = split(cur.next(), ' ');
        if (head.size() < 2 || head[0] != "model")
            throw std::invalid_argument(path.string() + ": expected model header");
        auto field = [&](const std::string& key) -> std::string {
            for (std::size_t k = 0; k + 1 < head.size(); k += 2)
                if (head[k] == key) return head[k + 1];
            throw std::invalid_argument(path.string() + ": model header missing '" + key + "'");
        };
        if (out.family == ModelFamily::Cmlp) {
            CmlpNet net = init_cmlp(static_cast<std::size_t>(parse_long(field("p"), path.string())),
                                    static_cast<std::size_t>(parse_long(field("lag"), path.string())),
                                    static_cast<std::size_t>(parse_long(field("hidden"), path.string())),
                                    static_cast<std::size_t>(parse_long(field("layers"), path.string())),
                                    activation_from_string(field("activation")), 0,
                                    InitScheme::Zeros, InitScheme::Zeros);
            cmlp_unflatten(net, detail::parse_flat_params(cur));
            out.cmlp.push_back(std::move(net));
        } else {
            ClstmNet net = init_clstm(static_cast<std::size_t>(parse_long(field("p"), path.string())),
                                      static_cast<std::size_t>(parse_long(field("hidden"), path.string())),
                                      0, InitScheme::Zeros, InitScheme::Zeros);
            clstm_unflatten(net, detail::parse_flat_params(cur));
            out.clstm.push_back(std::move(net));
        }
    }
    return out;
}

}  // namespace ngc
