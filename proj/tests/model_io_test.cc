#include <fstream>

#include <gtest/gtest.h>

#include "mblm/classify.hh"
#include "mblm/digest.hh"
#include "mblm/model.hh"
#include "mblm/weights.hh"
#include "oracles.hh"
#include "support.hh"

namespace mblm {
namespace {

Model random_model(std::uint64_t seed, Algorithm algorithm, std::size_t n = 3) {
  oracle::Rng rng(seed);
  const auto s = oracle::random_stream(rng, 25, 1500, 4);
  const InstanceBase base = window_instances(s, n, 25);
  Model m = build_model(base, compute_weights(base), oracle::numbered_vocab(25),
                        algorithm == Algorithm::kIgtree ? Algorithm::kTribl2 : algorithm);
  const std::string text = "corpus " + std::to_string(seed);
  m.corpus_digest = sha256(std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
  return algorithm == Algorithm::kIgtree ? prune_igtree(std::move(m)) : m;
}

std::filesystem::path temp_file(const std::string &name) { return std::filesystem::temp_directory_path() / name; }

TEST(ModelIo, RoundTripIsStructurallyEqual) {
  for (Algorithm algo : {Algorithm::kIb1, Algorithm::kTribl2, Algorithm::kIgtree}) {
    const Model m = random_model(71, algo);
    const Model back = deserialize_model(serialize_model(m));
    EXPECT_TRUE(structurally_equal(m, back)) << to_string(algo);
    EXPECT_EQ(back.algorithm, algo);
    EXPECT_EQ(back.pruned, algo == Algorithm::kIgtree);
    EXPECT_EQ(back.corpus_digest, m.corpus_digest);
    EXPECT_NEAR(back.weights.class_entropy, m.weights.class_entropy, 1e-12);
    EXPECT_EQ(serialize_model(back), serialize_model(m));
  }
}

TEST(ModelIo, SaveLoadFile) {
  const auto path = temp_file("mblm_model_io_test.bin");
  const Model m = random_model(72, Algorithm::kTribl2);
  save_model(m, path);
  const Model back = load_model(path);
  EXPECT_TRUE(structurally_equal(m, back));
  oracle::Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    oracle::Context q(3);
    for (auto &t : q) t = static_cast<TokenId>(oracle::uniform(rng, 0, 25));
    EXPECT_EQ(classify(m, q).distribution, classify(back, q).distribution);
  }
  std::filesystem::remove(path);
}

TEST(ModelIo, HeaderLayout) {
  const Model m = random_model(73, Algorithm::kIgtree, 2);
  const auto bytes = serialize_model(m);
  ASSERT_GT(bytes.size(), 24u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MTLM");
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
  EXPECT_EQ(bytes[8], 2);  // IGTree
  EXPECT_EQ(bytes[9], 2);  // context width
  EXPECT_EQ(bytes[10], 1);  // pruned
}

TEST(ModelIo, WrongMagicIsIncompatible) {
  auto bytes = serialize_model(random_model(74, Algorithm::kIb1));
  bytes[1] = 'X';
  EXPECT_EQ(kind_of([&] { deserialize_model(bytes); }), ErrorKind::kIncompatibleModel);
}

TEST(ModelIo, WrongVersionIsIncompatible) {
  auto bytes = serialize_model(random_model(75, Algorithm::kIb1));
  bytes[4] = 7;
  EXPECT_EQ(kind_of([&] { deserialize_model(bytes); }), ErrorKind::kIncompatibleModel);
}

TEST(ModelIo, TruncationIsCorruptWithOffset) {
  const auto bytes = serialize_model(random_model(76, Algorithm::kTribl2, 1));
  for (std::size_t len = 0; len < bytes.size(); len += 1 + len / 50) {
    try {
      deserialize_model(std::span(bytes).first(len));
      FAIL() << "accepted a file cut to " << len << " bytes";
    } catch (const Error &e) {
      EXPECT_EQ(e.kind(), ErrorKind::kCorruptModel) << len;
      EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
    }
  }
}

TEST(ModelIo, StructuralDamageIsCorrupt) {
  const auto good = serialize_model(random_model(77, Algorithm::kIb1));
  auto bad = good;
  bad[10] = 1;  // pruned flag on an IB1 model
  EXPECT_EQ(kind_of([&] { deserialize_model(bad); }), ErrorKind::kCorruptModel);
  bad = good;
  bad.push_back(0);
  EXPECT_EQ(kind_of([&] { deserialize_model(bad); }), ErrorKind::kCorruptModel);
}

TEST(ModelIo, MissingFileIsIoError) {
  EXPECT_EQ(kind_of([] { load_model("/nonexistent/model.bin"); }), ErrorKind::kIo);
}

TEST(ModelIo, ParseAlgorithmNames) {
  EXPECT_EQ(parse_algorithm("ib1"), Algorithm::kIb1);
  EXPECT_EQ(parse_algorithm("tribl2"), Algorithm::kTribl2);
  EXPECT_EQ(parse_algorithm("igtree"), Algorithm::kIgtree);
  EXPECT_EQ(kind_of([] { parse_algorithm("knn"); }), ErrorKind::kUsage);
}

TEST(Digest, KnownVector) {
  const std::string abc = "abc";
  EXPECT_EQ(to_hex(sha256(std::span(reinterpret_cast<const std::uint8_t *>(abc.data()), abc.size()))),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Digest, FilesInOrder) {
  const auto a = temp_file("mblm_digest_a.txt"), b = temp_file("mblm_digest_b.txt");
  std::ofstream(a) << "one\n";
  std::ofstream(b) << "two\n";
  const std::vector<std::filesystem::path> ab{a, b}, ba{b, a};
  EXPECT_EQ(digest_files(ab), digest_files(ab));
  EXPECT_NE(digest_files(ab), digest_files(ba));
  EXPECT_NE(chain_digest(digest_files(ab), digest_files(ba)), digest_files(ab));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

}  // namespace
}  // namespace mblm
