#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "gad/dataset.hpp"
#include "gad/errors.hpp"
#include "gad/log.hpp"

using namespace gad;

namespace {

std::filesystem::path data_dir() {
  const char* env = std::getenv("GAD_TEST_DATA");
  return env ? std::filesystem::path(env) : std::filesystem::path("tests/data");
}

Dataset reingest(const Dataset& d) {
  std::ostringstream edges, feats;
  write_edges_csv(edges, d);
  write_features_json(feats, d);
  std::istringstream ein(edges.str()), fin(feats.str());
  EdgeList el = parse_edges_csv(ein);
  IdMap ids = el.id_map;
  FeatureMatrix x = parse_features_json(fin, ids);
  Dataset out{build_from_edges(el.edges, ids.size()), std::move(x), std::nullopt, std::move(ids)};
  if (d.labels) {
    std::ostringstream labels;
    write_labels_csv(labels, d);
    std::istringstream lin(labels.str());
    out.labels = parse_labels_csv(lin, out.id_map);
  }
  return out;
}

std::size_t count_pairs_present(const SparseGraph& g, const std::vector<NodeId>& nodes) {
  std::size_t c = 0;
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = a + 1; b < nodes.size(); ++b) c += g.has_edge(nodes[a], nodes[b]);
  return c;
}

}  // namespace

TEST(EdgesCsv, MinimalFile) {
  std::istringstream in("id_1,id_2\n0,1");
  const auto el = parse_edges_csv(in);
  EXPECT_EQ(el.edges, (std::vector<Edge>{{0, 1}}));
  EXPECT_EQ(el.id_map.size(), 2u);
}

TEST(EdgesCsv, RemapsInFirstAppearanceOrder) {
  std::istringstream in("id_1,id_2\r\n9,5\r\n5,12\r\n");
  const auto el = parse_edges_csv(in);
  EXPECT_EQ(el.id_map.originals(), (std::vector<std::uint64_t>{9, 5, 12}));
  EXPECT_EQ(el.edges, (std::vector<Edge>{{0, 1}, {1, 2}}));
  EXPECT_EQ(el.id_map.find(12), NodeId{2});
  EXPECT_FALSE(el.id_map.find(7).has_value());
}

TEST(EdgesCsv, MalformedRowReportsLine) {
  for (const char* text : {"id_1,id_2\n0,1\n2;3\n", "id_1,id_2\n0,1\n-2,3\n", "id_1,id_2\n0,1\n2,3,4\n",
                           "id_1,id_2\n0,1\nx,3\n"}) {
    std::istringstream in(text);
    try {
      parse_edges_csv(in);
      FAIL() << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 3u) << text;
    }
  }
}

TEST(EdgesCsv, EmptyAndBadHeader) {
  std::istringstream empty("");
  EXPECT_THROW(parse_edges_csv(empty), InputError);
  std::istringstream header("a,b\n0,1\n");
  EXPECT_THROW(parse_edges_csv(header), ParseError);
  EXPECT_THROW(load_edges_csv("/nonexistent/edges.csv"), DataError);
}

TEST(FeaturesJson, MultiHotRow) {
  IdMap ids;
  ids.intern(0);
  std::istringstream in(R"({"0":[0,2]})");
  const auto x = parse_features_json(in, ids);
  EXPECT_EQ(x, DenseMatrix::from_rows({{1, 0, 1}}));
}

TEST(FeaturesJson, MissingNodeGetsZeroRowAndWarning) {
  IdMap ids;
  ids.intern(3);
  ids.intern(4);
  std::istringstream in(R"({"3":[1]})");
  ScopedWarningCapture warnings;
  const auto x = parse_features_json(in, ids);
  EXPECT_EQ(x, DenseMatrix::from_rows({{0, 1}, {0, 0}}));
  EXPECT_FALSE(warnings.empty());
}

TEST(FeaturesJson, UnknownIdsBecomeNewNodes) {
  IdMap ids;
  ids.intern(3);
  std::istringstream in(R"({"3":[0],"8":[1]})");
  const auto x = parse_features_json(in, ids);
  EXPECT_EQ(ids.originals(), (std::vector<std::uint64_t>{3, 8}));
  EXPECT_EQ(x.rows(), 2u);
}

TEST(FeaturesJson, L2Normalization) {
  IdMap ids;
  ids.intern(0);
  std::istringstream in(R"({"0":[0,1,2,3]})");
  const auto x = parse_features_json(in, ids, {true});
  for (double v : x.data()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(FeaturesJson, MalformedInput) {
  IdMap ids;
  for (const char* text : {"{", "[1,2]", R"({"0":[-1]})", R"({"0":"a"})", R"({"x":[1]})"}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_features_json(in, ids), ParseError) << text;
  }
}

TEST(LabelsCsv, ParseAndErrors) {
  const IdMap ids = IdMap::from_originals({7, 3});
  std::istringstream ok("node_id,label\n3,1\n7,0\n");
  EXPECT_EQ(parse_labels_csv(ok, ids), (Labels{0, 1}));
  std::istringstream bad("node_id,label\n3,2\n7,0\n");
  EXPECT_THROW(parse_labels_csv(bad, ids), ParseError);
  std::istringstream unknown("node_id,label\n3,1\n9,0\n");
  EXPECT_THROW(parse_labels_csv(unknown, ids), DataError);
  std::istringstream missing("node_id,label\n3,1\n");
  EXPECT_THROW(parse_labels_csv(missing, ids), DataError);
}

TEST(IdMap, IsBijection) {
  IdMap ids;
  for (std::uint64_t v : {40u, 7u, 40u, 99u, 7u}) ids.intern(v);
  ASSERT_EQ(ids.size(), 3u);
  for (NodeId i = 0; i < ids.size(); ++i) EXPECT_EQ(ids.find(ids.original(i)), i);
  EXPECT_THROW(IdMap::from_originals({1, 2, 1}), InputError);
}

TEST(GenerateSynthetic, EdgeCountWithinThreeSigma) {
  const Dataset d = generate_synthetic(100, 6.0, 16, 1);
  const double pairs = 100.0 * 99.0 / 2.0;
  const double p = 6.0 / 99.0;
  const double sigma = std::sqrt(pairs * p * (1.0 - p));
  EXPECT_NEAR(static_cast<double>(d.graph.edge_count()), 300.0, 3.0 * sigma);
  EXPECT_EQ(d.features.rows(), 100u);
  EXPECT_EQ(d.features.cols(), 16u);
  EXPECT_EQ(d.graph.self_loop_count(), 0u);
}

TEST(GenerateSynthetic, DeterministicAndDegenerateCases) {
  EXPECT_EQ(generate_synthetic(50, 4.0, 8, 3), generate_synthetic(50, 4.0, 8, 3));
  EXPECT_NE(generate_synthetic(50, 4.0, 8, 3), generate_synthetic(50, 4.0, 8, 4));
  EXPECT_EQ(generate_synthetic(10, 0.0, 4, 0).graph.edge_count(), 0u);
  EXPECT_THROW(generate_synthetic(9, 2.0, 4, 0), InputError);
}

TEST(GenerateSynthetic, FeaturesAreDegreeCorrelated) {
  const Dataset d = generate_synthetic(400, 8.0, 32, 2);
  // Every row carries exactly one degree-bucket bit in the first 8 columns.
  for (std::size_t i = 0; i < 400; ++i) {
    double bucket = 0.0;
    for (std::size_t c = 0; c < 8; ++c) bucket += d.features(i, c);
    EXPECT_EQ(bucket, 1.0);
  }
}

TEST(InjectAnomalies, EmptyGraphSingleClique) {
  Dataset d{build_from_edges({}, 5), DenseMatrix(5, 2, 1.0), std::nullopt, IdMap::identity(5)};
  InjectionConfig cfg;
  cfg.num_cliques = 1;
  cfg.clique_size = 3;
  cfg.feature_swap_fraction = 0.0;
  InjectionReport report;
  const Dataset out = inject_anomalies(d, cfg, &report);
  EXPECT_EQ(report.edges_added, 3u);
  EXPECT_EQ(out.graph.edge_count(), 3u);
  ASSERT_TRUE(out.labels.has_value());
  EXPECT_EQ(std::count(out.labels->begin(), out.labels->end(), 1), 3);
  for (NodeId v : report.cliques[0]) EXPECT_EQ((*out.labels)[v], 1);
}

TEST(InjectAnomalies, PairCliqueAddsOneEdgeIfAbsent) {
  const Dataset base = generate_synthetic(60, 3.0, 8, 1);
  InjectionConfig cfg;
  cfg.num_cliques = 4;
  cfg.clique_size = 2;
  cfg.feature_swap_fraction = 0.0;
  InjectionReport report;
  inject_anomalies(base, cfg, &report);
  std::size_t expected = 0;
  for (const auto& c : report.cliques) expected += base.graph.has_edge(c[0], c[1]) ? 0 : 1;
  EXPECT_EQ(report.edges_added, expected);
}

TEST(InjectAnomalies, RecountOracleAndInvariants) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Dataset base = generate_synthetic(200, 6.0, 16, seed);
    base.labels = Labels(200, 0);
    (*base.labels)[0] = 1;
    InjectionConfig cfg;
    cfg.seed = seed;
    InjectionReport report;
    const Dataset out = inject_anomalies(base, cfg, &report);

    std::size_t expected = 0;
    std::set<NodeId> members;
    for (const auto& c : report.cliques) {
      EXPECT_EQ(c.size(), cfg.clique_size);
      expected += c.size() * (c.size() - 1) / 2 - count_pairs_present(base.graph, c);
      EXPECT_EQ(count_pairs_present(out.graph, c), c.size() * (c.size() - 1) / 2);
      members.insert(c.begin(), c.end());
    }
    EXPECT_EQ(members.size(), cfg.num_cliques * cfg.clique_size);
    EXPECT_EQ(report.edges_added, expected);
    EXPECT_EQ(out.graph.edge_count(), base.graph.edge_count() + expected);
    EXPECT_EQ(report.swapped.size(), 25u);

    // No edge removed; untouched nodes keep labels and features.
    for (const auto& [i, j] : base.graph.edges()) EXPECT_TRUE(out.graph.has_edge(i, j));
    const std::set<NodeId> swapped(report.swapped.begin(), report.swapped.end());
    for (NodeId v = 0; v < 200; ++v) {
      if (members.count(v)) {
        EXPECT_EQ((*out.labels)[v], 1);
        continue;
      }
      EXPECT_EQ((*out.labels)[v], (*base.labels)[v]);
      for (std::size_t c = 0; c < 16; ++c) EXPECT_EQ(out.features(v, c), base.features(v, c));
    }
  }
}

TEST(InjectAnomalies, DeterministicAndInsufficientNodes) {
  const Dataset base = generate_synthetic(40, 4.0, 8, 2);
  InjectionConfig cfg;
  cfg.seed = 3;
  EXPECT_EQ(inject_anomalies(base, cfg), inject_anomalies(base, cfg));
  cfg.num_cliques = 9;
  EXPECT_THROW(inject_anomalies(base, cfg), InputError);
  cfg.num_cliques = 1;
  cfg.clique_size = 1;
  EXPECT_THROW(inject_anomalies(base, cfg), InputError);
}

TEST(Canonicalize, EmitIngestRoundTrip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    InjectionConfig cfg;
    cfg.seed = seed;
    const Dataset d = canonicalize(inject_anomalies(generate_synthetic(80, 3.0, 12, seed), cfg));
    EXPECT_EQ(reingest(d), d);
  }
}

TEST(Canonicalize, IsolatedNodesGoLast) {
  const std::vector<Edge> e{{2, 3}};
  Dataset d{build_from_edges(e, 4), DenseMatrix::from_rows({{1, 0}, {0, 1}, {1, 1}, {0, 1}}),
            std::nullopt, IdMap::identity(4)};
  const Dataset c = canonicalize(d);
  EXPECT_EQ(c.id_map.originals(), (std::vector<std::uint64_t>{2, 3, 0, 1}));
  EXPECT_EQ(reingest(c), c);
}

TEST(ExcerptFiles, IngestEmitIngestIsBitExact) {
  const auto dir = data_dir() / "facebook_excerpt";
  const Dataset first = load_dataset(dir / "musae_facebook_edges.csv", dir / "musae_facebook_features.json");
  EXPECT_EQ(first.num_nodes(), 200u);
  EXPECT_EQ(first.graph.edge_count(), 700u);
  EXPECT_EQ(load_dataset(dir / "musae_facebook_edges.csv", dir / "musae_facebook_features.json"), first);
  EXPECT_EQ(reingest(first), first);
}
