#pragma once

// CSV/JSON/DOT readers and writers. Numbers are written with 17 significant
// digits so outputs round-trip and are byte-stable across runs.

#include "finnet/correlation.hpp"
#include "finnet/econnet.hpp"
#include "finnet/filtergraph.hpp"
#include "finnet/graph.hpp"
#include "finnet/panel.hpp"
#include "finnet/spectrum.hpp"
#include "finnet/spillover.hpp"
#include "finnet/volatility.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace finnet::io {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Empty, "NA" and "NaN" cells are gaps.
enum class GapPolicy {
  reject,        // ValidationError naming the asset and date
  forward_fill,  // last observed price; a leading gap is still rejected
};

/// Header "date,<asset>,...", one row per date.
struct PriceData {
  PricePanel panel;
  /// [asset][t] set where the price was forward-filled.
  std::vector<std::vector<bool>> filled;
};
PriceData read_price_csv(const fs::path& path, GapPolicy policy = GapPolicy::reject);

/// Header "asset,sector,country".
LabelMap read_labels_csv(const fs::path& path);

/// Log returns of the price file, with labels attached when a sidecar is
/// given. A return is flagged when either of its prices was filled.
ReturnsPanel load_returns(const fs::path& prices, const fs::path& labels = {}, GapPolicy policy = GapPolicy::reject);

std::string format_double(double x);

void write_text(const fs::path& path, const std::string& text);
void write_json(const fs::path& path, const Json& j);

/// Same layout as the price file.
void write_price_csv(const fs::path& path, const PricePanel& panel);
void write_returns_csv(const fs::path& path, const ReturnsPanel& panel);
void write_labels_csv(const fs::path& path, const LabelMap& labels);

/// Header row of asset ids, then one row per asset led by its id.
void write_matrix_csv(const fs::path& path, const DependencyMatrix& m);
Json to_json(const DependencyMatrix& m);

/// source,target,weight[,p_value] with asset ids.
void write_graph_csv(const fs::path& path, const FilteredGraph& g);
Json to_json(const FilteredGraph& g);
std::string to_dot(const FilteredGraph& g);

/// step,a,b,height,size,id; a and b name leaves by asset id and inner
/// nodes by their merge id.
void write_dendrogram_csv(const fs::path& path, const Dendrogram& d);
void write_clustering_csv(const fs::path& path, const Clustering& c);
void write_composition_csv(const fs::path& path, const Composition& c);

/// One row per eigenpair: lambda then the vector components.
void write_eigen_csv(const fs::path& path, const EigenSystem& e, const std::vector<std::string>& assets);
Json to_json(const EigenSystem& e, const std::vector<std::string>& assets);
Json to_json(const MpSpectrum& mp);

Json to_json(const GarchFit& fit);
/// date,h
void write_variance_csv(const fs::path& path, const std::vector<std::string>& dates, const std::vector<double>& h);
Json to_json(const DccFit& fit, const std::vector<std::string>& assets);

/// Normalized decomposition, rows "to" assets, columns "from" assets.
void write_fevd_csv(const fs::path& path, const FevdMatrix& fevd);
Json to_json(const FevdMatrix& fevd);
Json to_json(const Connectedness& c, const std::vector<std::string>& assets);
/// date,total (empty total for a missing window).
void write_spillover_csv(const fs::path& path, const std::vector<SpilloverPoint>& series);

/// Columns of equal length under the given header.
void write_columns_csv(const fs::path& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns);

}  // namespace finnet::io
