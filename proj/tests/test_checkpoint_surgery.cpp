// Copyright 2026 The dialsid Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "dialsid/surgery.hpp"
#include "support.hpp"

using namespace dialsid;
using testing::SyntheticModel;
using testing::TempDir;

namespace {

// Hand-assembled container: length prefix, header, data.
std::string raw_container(const std::string& header, const std::string& data) {
  std::string out(8, '\0');
  const std::uint64_t n = header.size();
  for (int i = 0; i < 8; ++i) out[i] = static_cast<char>((n >> (8 * i)) & 0xFF);
  return out + header + data;
}

std::map<std::string, std::vector<std::byte>> all_bytes(const CheckpointFile& f) {
  std::map<std::string, std::vector<std::byte>> out;
  for (const auto& e : f.index().entries) out[e.name] = f.read(e);
  return out;
}

}  // namespace

TEST_CASE("reads a hand-built container") {
  TempDir dir;
  // Two F32 scalars, header not sorted, unpadded.
  const std::string header =
      R"({"b":{"dtype":"F32","shape":[1],"data_offsets":[4,8]},"a":{"dtype":"F32","shape":[],"data_offsets":[0,4]},"__metadata__":{"k":"v"}})";
  const float one = 1.0f, two = 2.0f;
  std::string data(8, '\0');
  std::memcpy(data.data(), &one, 4);
  std::memcpy(data.data() + 4, &two, 4);
  testing::spit(dir.file("x.safetensors"), raw_container(header, data));

  const auto f = CheckpointFile::open(dir.file("x.safetensors"));
  REQUIRE(f.index().entries.size() == 2);
  CHECK(f.index().entries[0].name == "a");
  CHECK(f.index().entries[0].shape.empty());
  CHECK(f.index().metadata.at("k") == "v");
  const auto b = f.read("b");
  float value = 0;
  std::memcpy(&value, b.data(), 4);
  CHECK(value == 2.0f);
}

TEST_CASE("malformed containers are rejected") {
  TempDir dir;
  const std::string path = dir.file("bad.safetensors");
  auto open_bad = [&](const std::string& bytes) {
    testing::spit(path, bytes);
    return CheckpointFile::open(path);
  };
  const std::string ok_entry = R"("a":{"dtype":"F32","shape":[2],"data_offsets":[0,8]})";

  CHECK_THROWS_AS(open_bad("abc"), CheckpointFormatError);
  {
    std::string s = raw_container("{}", "");
    s[0] = static_cast<char>(200);  // header longer than the file
    CHECK_THROWS_AS(open_bad(s), CheckpointFormatError);
  }
  CHECK_THROWS_AS(open_bad(raw_container("{" + ok_entry + "}", "1234")), CheckpointFormatError);
  CHECK_THROWS_AS(open_bad(raw_container("{not json}", "")), CheckpointFormatError);
  CHECK_THROWS_AS(open_bad(raw_container(R"({"a":{"dtype":"F32","shape":[3],"data_offsets":[0,8]}})",
                                         std::string(8, 'x'))),
                  CheckpointFormatError);
  CHECK_THROWS_AS(open_bad(raw_container(R"({"a":{"dtype":"Q7","shape":[2],"data_offsets":[0,8]}})",
                                         std::string(8, 'x'))),
                  CheckpointFormatError);
  CHECK_THROWS_AS(
      open_bad(raw_container(
          R"({"a":{"dtype":"F32","shape":[2],"data_offsets":[0,8]},"b":{"dtype":"F32","shape":[2],"data_offsets":[4,12]}})",
          std::string(12, 'x'))),
      CheckpointFormatError);
  CHECK_NOTHROW(open_bad(raw_container("{" + ok_entry + "}", std::string(8, 'x'))));
}

TEST_CASE("write is canonical and round trips byte for byte") {
  TempDir dir;
  const std::string a = testing::write_synthetic(dir.file("a.safetensors"), SyntheticModel{}, 1);
  const std::string bytes = testing::slurp(a);
  std::uint64_t n = 0;
  for (int i = 7; i >= 0; --i) n = (n << 8) | static_cast<unsigned char>(bytes[i]);
  CHECK(n % 8 == 0);
  const auto header = nlohmann::json::parse(bytes.substr(8, n));
  CHECK(header.contains("__metadata__"));

  const auto f = CheckpointFile::open(a);
  write_checkpoint(plan_from(f), dir.file("b.safetensors"));
  CHECK(testing::slurp(dir.file("b.safetensors")) == bytes);

  testing::write_synthetic(dir.file("c.safetensors"), SyntheticModel{}, 1);
  CHECK(testing::slurp(dir.file("c.safetensors")) == bytes);
}

TEST_CASE("empty container and random tensors") {
  TempDir dir;
  write_checkpoint(CheckpointPlan{}, dir.file("empty.safetensors"));
  CHECK(CheckpointFile::open(dir.file("empty.safetensors")).index().entries.empty());

  std::mt19937_64 gen(3);
  const std::array<DType, 6> dtypes{DType::kF32, DType::kF16, DType::kBF16, DType::kI64, DType::kU8, DType::kBool};
  CheckpointPlan plan;
  std::map<std::string, std::vector<std::byte>> expected;
  for (int i = 0; i < 100; ++i) {
    PlannedTensor t;
    t.name = "t" + std::to_string(gen() % 1000000) + "." + std::to_string(i);
    t.dtype = dtypes[gen() % dtypes.size()];
    t.shape = {gen() % 4, 1 + gen() % 3};
    std::vector<std::byte> data(t.shape[0] * t.shape[1] * dtype_size(t.dtype));
    for (auto& b : data) b = static_cast<std::byte>(gen() & 0xFF);
    expected[t.name] = data;
    t.data = std::move(data);
    plan.tensors.push_back(std::move(t));
  }
  write_checkpoint(plan, dir.file("r.safetensors"));
  const auto f = CheckpointFile::open(dir.file("r.safetensors"));
  CHECK(all_bytes(f) == expected);
  for (const auto& t : plan.tensors) {
    const TensorEntry* e = f.index().find(t.name);
    REQUIRE(e);
    CHECK(e->dtype == t.dtype);
    CHECK(e->shape == t.shape);
  }
}

TEST_CASE("write rejects inconsistent plans") {
  TempDir dir;
  CheckpointPlan plan;
  plan.tensors.push_back({"a", DType::kF32, {2}, std::vector<std::byte>(4)});
  CHECK_THROWS_AS(write_checkpoint(plan, dir.file("x")), CheckpointFormatError);
  plan.tensors[0].data = std::vector<std::byte>(8);
  plan.tensors.push_back(plan.tensors[0]);
  CHECK_THROWS_AS(write_checkpoint(plan, dir.file("x")), CheckpointFormatError);
  CHECK_FALSE(std::filesystem::exists(dir.file("x")));
}

TEST_CASE("layer groups are delimiter aware and partition the names") {
  const NamingScheme scheme;
  const auto names = testing::synthetic_names(SyntheticModel{});
  const auto layer1 = layer_group(scheme, LayerGroup::encoder_layer(1), names);
  CHECK(layer1.size() == 3);
  for (const auto& n : layer1) CHECK(n.starts_with("encoder.layer.1."));
  for (const auto& n : layer_group(scheme, LayerGroup::encoder_layer(0), names)) {
    CHECK(n.starts_with("encoder.layer.0."));
  }
  CHECK(classify(scheme, "encoder.layer.10.output.dense.weight") == LayerGroup::encoder_layer(10));
  CHECK(classify(scheme, "encoder.layer.1x.weight") == std::nullopt);
  CHECK(classify(scheme, "pooler.dense.weight") == std::nullopt);

  const GroupCoverage c = group_coverage(scheme, names);
  CHECK(c.unassigned.empty());
  std::set<std::string> seen;
  std::size_t total = 0;
  for (const auto& [id, members] : c.groups) {
    total += members.size();
    seen.insert(members.begin(), members.end());
  }
  CHECK(total == names.size());
  CHECK(seen.size() == names.size());
  CHECK(c.groups.size() == 14);

  CHECK_THROWS_AS(layer_group(scheme, LayerGroup::encoder_layer(12), names), SurgeryError);
  NamingScheme wrong;
  wrong.layer_template = "roberta.encoder.layer.{i}.";
  CHECK_THROWS_AS(layer_group(wrong, LayerGroup::encoder_layer(0), names), SurgeryError);
}

TEST_CASE("naming scheme config") {
  const auto s = naming_scheme_from_json(nlohmann::json{{"layer_template", "deberta.encoder.layer.{i}."},
                                                        {"num_layers", 6}});
  CHECK(s.num_layers == 6);
  CHECK(s.embeddings_prefixes == std::vector<std::string>{"embeddings."});
  CHECK_THROWS_AS(naming_scheme_from_json(nlohmann::json{{"layers", 6}}), std::invalid_argument);
  CHECK_THROWS_AS(naming_scheme_from_json(nlohmann::json{{"layer_template", "encoder.layer."}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(naming_scheme_from_json(nlohmann::json{{"layer_template", "{i}.{i}"}}), std::invalid_argument);
  CHECK(parse_layer_group("embeddings") == LayerGroup::embeddings());
  CHECK(parse_layer_group("layer.3") == LayerGroup::encoder_layer(3));
  CHECK(parse_layer_group("7") == LayerGroup::encoder_layer(7));
  CHECK_THROWS(parse_layer_group("x"));

  // Overlapping prefixes make a name ambiguous.
  NamingScheme clash;
  clash.head_prefixes = {"embeddings.word"};
  CHECK_THROWS_AS(classify(clash, "embeddings.word_embeddings.weight"), SurgeryError);
}

TEST_CASE("swap, revert and the byte frame rule") {
  TempDir dir;
  const NamingScheme scheme;
  const auto pa = testing::write_synthetic(dir.file("a.st"), SyntheticModel{}, 1);
  const auto pb = testing::write_synthetic(dir.file("b.st"), SyntheticModel{}, 2);
  const auto pc = testing::write_synthetic(dir.file("c.st"), SyntheticModel{}, 3);
  const auto A = CheckpointFile::open(pa);
  const auto B = CheckpointFile::open(pb);
  const auto bytes_a = all_bytes(A);
  const auto bytes_b = all_bytes(B);

  SUBCASE("assembled model: donor layers 0,1 and embeddings in the recipient") {
    const std::vector<std::size_t> layers{0, 1};
    write_checkpoint(swap_layers(A, B, layers, true, scheme), dir.file("ab.st"));
    const auto AB = CheckpointFile::open(dir.file("ab.st"));
    for (const auto& [name, bytes] : all_bytes(AB)) {
      const bool swapped = name.starts_with("embeddings.") || name.starts_with("encoder.layer.0.") ||
                           name.starts_with("encoder.layer.1.");
      CAPTURE(name);
      CHECK(bytes == (swapped ? bytes_b.at(name) : bytes_a.at(name)));
    }
    CHECK(AB.index().metadata == A.index().metadata);

    write_checkpoint(swap_layers(AB, A, layers, true, scheme), dir.file("aba.st"));
    CHECK(testing::slurp(dir.file("aba.st")) == testing::slurp(pa));
  }

  SUBCASE("swap with itself and with no groups") {
    const std::vector<std::size_t> layers{3, 4};
    write_checkpoint(swap_layers(A, A, layers, true, scheme), dir.file("aa.st"));
    CHECK(testing::slurp(dir.file("aa.st")) == testing::slurp(pa));
    write_checkpoint(revert_layers(A, B, {}, scheme), dir.file("a0.st"));
    CHECK(testing::slurp(dir.file("a0.st")) == testing::slurp(pa));
  }

  SUBCASE("revert everything gives the pretrained file") {
    std::vector<LayerGroup> all{LayerGroup::embeddings(), LayerGroup::heads()};
    for (std::size_t i = 0; i < 12; ++i) all.push_back(LayerGroup::encoder_layer(i));
    write_checkpoint(revert_layers(A, B, all, scheme), dir.file("rev.st"));
    CHECK(testing::slurp(dir.file("rev.st")) == testing::slurp(pb));
  }

  SUBCASE("sequential pairs: revert is idempotent and local") {
    const auto pairs = sequential_layer_pairs(12);
    REQUIRE(pairs.size() == 11);
    CHECK(pairs.front() == std::vector<LayerGroup>{LayerGroup::encoder_layer(0), LayerGroup::encoder_layer(1)});
    CHECK(pairs.back() == std::vector<LayerGroup>{LayerGroup::encoder_layer(10), LayerGroup::encoder_layer(11)});
    for (const auto& pair : pairs) {
      write_checkpoint(revert_layers(A, B, pair, scheme), dir.file("r1.st"));
      const auto R1 = CheckpointFile::open(dir.file("r1.st"));
      write_checkpoint(revert_layers(R1, B, pair, scheme), dir.file("r2.st"));
      CHECK(testing::slurp(dir.file("r1.st")) == testing::slurp(dir.file("r2.st")));
      const std::string p0 = "encoder.layer." + std::to_string(pair[0].layer) + ".";
      const std::string p1 = "encoder.layer." + std::to_string(pair[1].layer) + ".";
      for (const auto& [name, bytes] : all_bytes(R1)) {
        const bool reverted = name.starts_with(p0) || name.starts_with(p1);
        CHECK(bytes == (reverted ? bytes_b.at(name) : bytes_a.at(name)));
      }
    }
  }

  SUBCASE("mismatched structure is an error naming the tensor") {
    const auto narrow = testing::write_synthetic(dir.file("n.st"), SyntheticModel{12, 3}, 4);
    const auto N = CheckpointFile::open(narrow);
    const std::vector<std::size_t> layers{0};
    try {
      swap_layers(A, N, layers, false, scheme);
      FAIL("expected SurgeryError");
    } catch (const SurgeryError& e) {
      CHECK(std::string(e.what()).find("encoder.layer.0.") != std::string::npos);
    }
    const auto six = testing::write_synthetic(dir.file("six.st"), SyntheticModel{6, 4}, 4);
    const std::vector<std::size_t> late{8};
    CHECK_THROWS_AS(swap_layers(CheckpointFile::open(six), A, late, false, scheme), SurgeryError);
  }
  (void)pc;
}

TEST_CASE("float decoding") {
  const std::array<std::uint16_t, 3> half{0x3C00, 0xC000, 0x3555};  // 1, -2, ~1/3
  std::vector<std::byte> raw(6);
  std::memcpy(raw.data(), half.data(), 6);
  const Eigen::ArrayXd h = decode_floats(raw, DType::kF16);
  CHECK(h(0) == 1.0);
  CHECK(h(1) == -2.0);
  CHECK(h(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
  const std::array<std::uint16_t, 2> bf{0x3F80, 0x4040};  // 1, 3
  std::memcpy(raw.data(), bf.data(), 4);
  raw.resize(4);
  const Eigen::ArrayXd b = decode_floats(raw, DType::kBF16);
  CHECK(b(0) == 1.0);
  CHECK(b(1) == 3.0);
  CHECK_THROWS_AS(decode_floats(raw, DType::kI32), SurgeryError);
}

TEST_CASE("MAV") {
  TempDir dir;
  const NamingScheme scheme;
  const SyntheticModel m;
  auto base = [](std::size_t n, std::size_t k) { return testing::pseudo_random(5, n, k); };
  auto delta = [](std::size_t n, std::size_t k) { return 0.001f * testing::pseudo_random(6, n, k); };

  write_checkpoint(testing::synthetic_plan(m, base), dir.file("a.st"));
  const auto A = CheckpointFile::open(dir.file("a.st"));

  SUBCASE("identical checkpoints") {
    const MavReport r = mav_report(A, A, scheme);
    CHECK(r.global_variance == 0.0);
    CHECK(r.global_mav == 0.0);
    for (const auto& [k, g] : r.per_group) CHECK(g.mav == 0.0);
    CHECK(r.per_group.size() == 14);
  }

  SUBCASE("constant shift on one layer") {
    const auto names = testing::synthetic_names(m);
    write_checkpoint(testing::synthetic_plan(m,
                                             [&](std::size_t n, std::size_t k) {
                                               const bool layer3 = names[n].starts_with("encoder.layer.3.");
                                               return base(n, k) + (layer3 ? 0.25f : 0.0f);
                                             }),
                     dir.file("b.st"));
    const MavReport r = mav_report(A, CheckpointFile::open(dir.file("b.st")), scheme);
    CHECK(r.per_group.at("layer.3").mav == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(r.per_group.at("layer.2").mav == 0.0);
    CHECK(r.per_group.at("heads").mav == 0.0);
  }

  SUBCASE("linearity and symmetry") {
    // a = 0, b = d versus a = 0, b = 2d: doubling is exact in binary floating point.
    write_checkpoint(testing::synthetic_plan(m, [](std::size_t, std::size_t) { return 0.0f; }), dir.file("z.st"));
    write_checkpoint(testing::synthetic_plan(m, delta), dir.file("d.st"));
    write_checkpoint(testing::synthetic_plan(m, [&](std::size_t n, std::size_t k) { return 2.0f * delta(n, k); }),
                     dir.file("d2.st"));
    const auto Z = CheckpointFile::open(dir.file("z.st"));
    const auto D = CheckpointFile::open(dir.file("d.st"));
    const auto D2 = CheckpointFile::open(dir.file("d2.st"));
    const MavReport one = mav_report(Z, D, scheme);
    const MavReport two = mav_report(Z, D2, scheme);
    const MavReport back = mav_report(D, Z, scheme);
    for (const auto& [k, g] : one.per_group) {
      CAPTURE(k);
      CHECK(std::abs(two.per_group.at(k).mav - 2 * g.mav) <= 1e-12 * 2 * g.mav);
      CHECK(back.per_group.at(k).mav == g.mav);
    }
    CHECK(std::abs(two.global_variance - 4 * one.global_variance) <= 1e-12 * 4 * one.global_variance);
    CHECK(back.global_variance == doctest::Approx(one.global_variance).epsilon(1e-14));
  }

  SUBCASE("variance against a direct two-pass computation") {
    write_checkpoint(testing::synthetic_plan(m, [&](std::size_t n, std::size_t k) { return base(n, k) + delta(n, k); }),
                     dir.file("b.st"));
    const auto B = CheckpointFile::open(dir.file("b.st"));
    std::vector<double> diffs;
    for (const auto& e : A.index().entries) {
      const auto x = A.read(e);
      const auto y = B.read(e.name);
      for (std::size_t i = 0; i < x.size() / 4; ++i) {
        float fx, fy;
        std::memcpy(&fx, x.data() + 4 * i, 4);
        std::memcpy(&fy, y.data() + 4 * i, 4);
        diffs.push_back(static_cast<double>(fx) - static_cast<double>(fy));
      }
    }
    double mean = 0;
    for (double d : diffs) mean += d;
    mean /= static_cast<double>(diffs.size());
    double var = 0, mav = 0;
    for (double d : diffs) {
      var += (d - mean) * (d - mean);
      mav += std::abs(d);
    }
    var /= static_cast<double>(diffs.size());
    mav /= static_cast<double>(diffs.size());
    const MavReport r = mav_report(A, B, scheme);
    CHECK(r.parameters == diffs.size());
    CHECK(r.global_variance == doctest::Approx(var).epsilon(1e-10));
    CHECK(r.global_mav == doctest::Approx(mav).epsilon(1e-12));
  }

  SUBCASE("structure mismatch") {
    write_checkpoint(testing::synthetic_plan(SyntheticModel{11, 4}, base), dir.file("s.st"));
    CHECK_THROWS_AS(mav_report(A, CheckpointFile::open(dir.file("s.st")), scheme), SurgeryError);
  }
}
