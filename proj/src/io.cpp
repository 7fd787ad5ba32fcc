#include "finnet/io.hpp"

#include "finnet/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace finnet::io {

namespace {

std::string trim(std::string s) {
  const auto keep = [](unsigned char c) { return !std::isspace(c) && c != '"'; };
  while (!s.empty() && !keep(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && !keep(static_cast<unsigned char>(s[start]))) ++start;
  return s.substr(start);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::vector<std::vector<std::string>> read_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    rows.push_back(split_row(line));
  }
  if (rows.empty()) throw ValidationError(path.string() + " is empty");
  return rows;
}

bool is_gap(const std::string& cell) { return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan"; }

double parse_number(const std::string& cell, const std::string& where) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) throw ValidationError("not a number at " + where + ": '" + cell + "'");
  return value;
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k > 0) out += ',';
    out += cells[k];
  }
  return out;
}

std::string node_name(const FilteredGraph& g, int v) { return g.nodes[static_cast<std::size_t>(v)]; }

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

std::string dot_id(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

}  // namespace

PriceData read_price_csv(const fs::path& path, GapPolicy policy) {
  const auto rows = read_rows(path);
  const auto& header = rows.front();
  require(header.size() >= 2, path.string() + ": header needs a date column and at least one asset");
  PriceData out;
  PricePanel& panel = out.panel;
  panel.assets.assign(header.begin() + 1, header.end());
  const std::size_t n = panel.assets.size();
  const std::size_t t = rows.size() - 1;
  panel.prices.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  out.filled.assign(n, std::vector<bool>(t, false));
  for (std::size_t r = 0; r < t; ++r) {
    const auto& row = rows[r + 1];
    if (row.size() != n + 1) {
      throw ValidationError(path.string() + ": row " + std::to_string(r + 2) + " has " + std::to_string(row.size()) +
                            " cells, expected " + std::to_string(n + 1));
    }
    panel.timestamps.push_back(row[0]);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string where = "asset " + panel.assets[i] + ", date " + row[0];
      const auto ii = static_cast<Eigen::Index>(i);
      const auto rr = static_cast<Eigen::Index>(r);
      if (!is_gap(row[i + 1])) {
        panel.prices(ii, rr) = parse_number(row[i + 1], where);
        continue;
      }
      if (policy == GapPolicy::reject) throw ValidationError("missing price at " + where);
      if (r == 0) throw ValidationError("missing price at " + where + " with no earlier price to carry forward");
      panel.prices(ii, rr) = panel.prices(ii, rr - 1);
      out.filled[i][r] = true;
    }
  }
  panel.validate();
  return out;
}

LabelMap read_labels_csv(const fs::path& path) {
  const auto rows = read_rows(path);
  require(rows.front().size() >= 3 && rows.front()[0] == "asset" && rows.front()[1] == "sector" &&
              rows.front()[2] == "country",
          path.string() + ": header must be asset,sector,country");
  LabelMap labels;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    require(row.size() >= 3, path.string() + ": row " + std::to_string(r + 1) + " needs asset,sector,country");
    if (!labels.emplace(row[0], AssetLabel{row[1], row[2]}).second) {
      throw ValidationError(path.string() + ": duplicate label for asset " + row[0]);
    }
  }
  return labels;
}

ReturnsPanel load_returns(const fs::path& prices, const fs::path& labels, GapPolicy policy) {
  PriceData data = read_price_csv(prices, policy);
  if (!labels.empty()) data.panel.labels = read_labels_csv(labels);
  ReturnsPanel r = log_returns(data.panel);
  bool any = false;
  for (const auto& row : data.filled) any = any || std::find(row.begin(), row.end(), true) != row.end();
  if (any) {
    r.filled.assign(data.filled.size(), std::vector<bool>(static_cast<std::size_t>(r.n_obs()), false));
    for (std::size_t i = 0; i < data.filled.size(); ++i) {
      for (std::size_t t = 0; t < r.filled[i].size(); ++t) r.filled[i][t] = data.filled[i][t] || data.filled[i][t + 1];
    }
  }
  return r;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw ValidationError("failed writing " + path.string());
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void write_price_csv(const fs::path& path, const PricePanel& panel) {
  std::string s = "date," + join(panel.assets) + "\n";
  for (Eigen::Index t = 0; t < panel.n_obs(); ++t) {
    s += panel.timestamps[static_cast<std::size_t>(t)];
    for (Eigen::Index i = 0; i < panel.n_assets(); ++i) s += "," + format_double(panel.prices(i, t));
    s += "\n";
  }
  write_text(path, s);
}

void write_returns_csv(const fs::path& path, const ReturnsPanel& panel) {
  std::string s = "date," + join(panel.assets) + "\n";
  for (Eigen::Index t = 0; t < panel.n_obs(); ++t) {
    s += panel.timestamps[static_cast<std::size_t>(t)];
    for (Eigen::Index i = 0; i < panel.n_assets(); ++i) s += "," + format_double(panel.returns(i, t));
    s += "\n";
  }
  write_text(path, s);
}

void write_labels_csv(const fs::path& path, const LabelMap& labels) {
  std::string s = "asset,sector,country\n";
  for (const auto& [asset, label] : labels) s += asset + "," + label.sector + "," + label.country + "\n";
  write_text(path, s);
}

void write_matrix_csv(const fs::path& path, const DependencyMatrix& m) {
  std::string s = "asset," + join(m.assets) + "\n";
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    s += m.assets[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.size(); ++j) s += "," + format_double(m.values(i, j));
    s += "\n";
  }
  write_text(path, s);
}

Json to_json(const DependencyMatrix& m) {
  Json j;
  j["kind"] = to_string(m.kind);
  j["assets"] = m.assets;
  j["values"] = matrix_json(m.values);
  if (m.window) {
    Json w;
    w["start"] = m.window->start;
    w["end"] = m.window->end;
    w["delta_t"] = m.window->delta_t;
    w["theta"] = m.window->theta ? Json(*m.window->theta) : Json(nullptr);
    j["window"] = std::move(w);
  } else {
    j["window"] = nullptr;
  }
  return j;
}

void write_graph_csv(const fs::path& path, const FilteredGraph& g) {
  bool with_p = false;
  for (const auto& e : g.edges) with_p = with_p || e.p_value.has_value();
  std::string s = with_p ? "source,target,weight,p_value\n" : "source,target,weight\n";
  for (const auto& e : g.edges) {
    s += node_name(g, e.source) + "," + node_name(g, e.target) + "," + format_double(e.weight);
    if (with_p) s += "," + (e.p_value ? format_double(*e.p_value) : std::string());
    s += "\n";
  }
  write_text(path, s);
}

Json to_json(const FilteredGraph& g) {
  Json j;
  j["provenance"] = to_string(g.provenance);
  j["directed"] = g.directed;
  j["genus"] = g.genus;
  j["nodes"] = g.nodes;
  if (!g.node_weights.empty()) j["node_weights"] = g.node_weights;
  Json edges = Json::array();
  for (const auto& e : g.edges) {
    Json je;
    je["source"] = node_name(g, e.source);
    je["target"] = node_name(g, e.target);
    je["weight"] = e.weight;
    if (e.p_value) je["p_value"] = *e.p_value;
    edges.push_back(std::move(je));
  }
  j["edges"] = std::move(edges);
  return j;
}

std::string to_dot(const FilteredGraph& g) {
  const char* arrow = g.directed ? " -> " : " -- ";
  std::string s = std::string(g.directed ? "digraph" : "graph") + " " + to_string(g.provenance) + " {\n";
  for (const auto& v : g.nodes) s += "  " + dot_id(v) + ";\n";
  for (const auto& e : g.edges) {
    s += "  " + dot_id(node_name(g, e.source)) + arrow + dot_id(node_name(g, e.target)) +
         " [weight=" + format_double(e.weight) + "];\n";
  }
  return s + "}\n";
}

void write_dendrogram_csv(const fs::path& path, const Dendrogram& d) {
  const auto n = static_cast<int>(d.leaves.size());
  const auto name = [&](int id) { return id < n ? d.leaves[static_cast<std::size_t>(id)] : std::to_string(id); };
  std::string s = "step,a,b,height,size,id\n";
  for (std::size_t k = 0; k < d.merges.size(); ++k) {
    const Merge& m = d.merges[k];
    s += std::to_string(k) + "," + name(m.a) + "," + name(m.b) + "," + format_double(m.height) + "," +
         std::to_string(m.size) + "," + std::to_string(m.id) + "\n";
  }
  write_text(path, s);
}

void write_clustering_csv(const fs::path& path, const Clustering& c) {
  std::string s = "asset,cluster\n";
  for (std::size_t i = 0; i < c.assets.size(); ++i) s += c.assets[i] + "," + std::to_string(c.assignment[i]) + "\n";
  write_text(path, s);
}

void write_composition_csv(const fs::path& path, const Composition& c) {
  std::string s = "cluster," + join(c.sectors) + "\n";
  for (std::size_t k = 0; k < c.fractions.size(); ++k) {
    s += std::to_string(k);
    for (double f : c.fractions[k]) s += "," + format_double(f);
    s += "\n";
  }
  write_text(path, s);
}

void write_eigen_csv(const fs::path& path, const EigenSystem& e, const std::vector<std::string>& assets) {
  std::string s = "lambda," + join(assets) + "\n";
  for (Eigen::Index k = 0; k < e.values.size(); ++k) {
    s += format_double(e.values(k));
    for (Eigen::Index i = 0; i < e.vectors.rows(); ++i) s += "," + format_double(e.vectors(i, k));
    s += "\n";
  }
  write_text(path, s);
}

Json to_json(const EigenSystem& e, const std::vector<std::string>& assets) {
  Json j;
  j["assets"] = assets;
  j["values"] = vector_json(e.values);
  j["vectors"] = matrix_json(e.vectors.transpose());
  return j;
}

Json to_json(const MpSpectrum& mp) {
  Json j;
  j["q"] = mp.q;
  j["sigma_r"] = mp.sigma_r;
  j["lambda_minus"] = mp.lambda_minus;
  j["lambda_plus"] = mp.lambda_plus;
  return j;
}

Json to_json(const GarchFit& fit) {
  Json params;
  params["mu"] = fit.mu;
  params["alpha0"] = fit.alpha0;
  params["alphas"] = fit.alphas;
  params["betas"] = fit.betas;
  Json j;
  j["p"] = fit.spec.p;
  j["q"] = fit.spec.q;
  j["params"] = std::move(params);
  j["loglik"] = fit.loglik;
  j["initial_loglik"] = fit.initial_loglik;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  return j;
}

void write_variance_csv(const fs::path& path, const std::vector<std::string>& dates, const std::vector<double>& h) {
  require(dates.size() == h.size(), "variance path and dates differ in length");
  std::string s = "date,h\n";
  for (std::size_t t = 0; t < h.size(); ++t) s += dates[t] + "," + format_double(h[t]) + "\n";
  write_text(path, s);
}

Json to_json(const DccFit& fit, const std::vector<std::string>& assets) {
  Json params;
  params["a"] = fit.a;
  params["b"] = fit.b;
  Json j;
  j["assets"] = assets;
  j["params"] = std::move(params);
  j["qbar"] = matrix_json(fit.qbar);
  j["loglik"] = fit.loglik;
  j["initial_loglik"] = fit.initial_loglik;
  j["converged"] = fit.converged;
  Json margins = Json::array();
  for (const auto& g : fit.univariate) margins.push_back(to_json(g));
  j["univariate"] = std::move(margins);
  return j;
}

void write_fevd_csv(const fs::path& path, const FevdMatrix& fevd) {
  std::string s = "asset," + join(fevd.assets) + "\n";
  for (Eigen::Index i = 0; i < fevd.normalized.rows(); ++i) {
    s += fevd.assets[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < fevd.normalized.cols(); ++j) s += "," + format_double(fevd.normalized(i, j));
    s += "\n";
  }
  write_text(path, s);
}

Json to_json(const FevdMatrix& fevd) {
  Json j;
  j["horizon"] = fevd.horizon;
  j["assets"] = fevd.assets;
  j["raw"] = matrix_json(fevd.raw);
  j["normalized"] = matrix_json(fevd.normalized);
  j["sigma"] = vector_json(fevd.sigma);
  return j;
}

Json to_json(const Connectedness& c, const std::vector<std::string>& assets) {
  Json j;
  j["assets"] = assets;
  j["to"] = vector_json(c.to);
  j["from"] = vector_json(c.from);
  j["total"] = c.total;
  return j;
}

void write_spillover_csv(const fs::path& path, const std::vector<SpilloverPoint>& series) {
  std::string s = "date,total\n";
  for (const auto& p : series) s += p.timestamp + "," + (p.missing ? std::string() : format_double(p.total)) + "\n";
  write_text(path, s);
}

void write_columns_csv(const fs::path& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns) {
  require(header.size() == columns.size(), "column count differs from header");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) require(c.size() == rows, "columns differ in length");
  std::string s = join(header) + "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c > 0) s += ',';
      s += format_double(columns[c][r]);
    }
    s += "\n";
  }
  write_text(path, s);
}

}  // namespace finnet::io
