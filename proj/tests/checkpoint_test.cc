// Copyright 2026 The cerl Authors
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

#include "cerl/checkpoint.h"

#include <cstdio>
#include <filesystem>
#include <vector>

#include <gtest/gtest.h>

#include "cerl/random.h"

namespace cerl {
namespace {

Checkpoint Sample(bool recurrent) {
  PolicyArch a;
  a.obs_size = 5;
  a.act_size = 3;
  a.hidden = {7, 4};
  a.recurrent = recurrent;
  a.gru_size = 6;
  a.layout_hash = 0xfeedULL;
  Checkpoint ck;
  ck.policy = Policy(a, 3);
  ck.policy.normalizer().Init(5);
  ck.policy.normalizer().Update(Eigen::MatrixXd::Random(5, 9));
  ck.policy.Quantize();
  Rng rng(1);
  const std::size_t n = ck.policy.params().size();
  ck.adam.m.resize(n);
  ck.adam.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ck.adam.m[i] = static_cast<float>(rng.Normal());
    ck.adam.v[i] = static_cast<float>(rng.Uniform());
  }
  ck.adam.t = 17;
  ck.step = 123456;
  ck.config_digest = 0xabcdef0123ULL;
  return ck;
}

void ExpectEqual(const Checkpoint& a, const Checkpoint& b) {
  EXPECT_EQ(a.policy.params(), b.policy.params());
  EXPECT_EQ(a.policy.normalizer().mean, b.policy.normalizer().mean);
  EXPECT_EQ(a.policy.normalizer().var, b.policy.normalizer().var);
  EXPECT_EQ(a.policy.normalizer().count, b.policy.normalizer().count);
  EXPECT_EQ(a.adam.m, b.adam.m);
  EXPECT_EQ(a.adam.v, b.adam.v);
  EXPECT_EQ(a.adam.t, b.adam.t);
  EXPECT_EQ(a.step, b.step);
  EXPECT_EQ(a.config_digest, b.config_digest);
  EXPECT_EQ(a.policy.arch().hidden, b.policy.arch().hidden);
  EXPECT_EQ(a.policy.arch().recurrent, b.policy.arch().recurrent);
}

TEST(CheckpointTest, RoundTripBitExact) {
  for (bool recurrent : {false, true}) {
    const Checkpoint ck = Sample(recurrent);
    const auto bytes = SerializeCheckpoint(ck);
    const Checkpoint back = DeserializeCheckpoint(bytes);
    ExpectEqual(ck, back);
    EXPECT_EQ(SerializeCheckpoint(back), bytes);
  }
}

TEST(CheckpointTest, FileRoundTrip) {
  const Checkpoint ck = Sample(false);
  const auto path = std::filesystem::temp_directory_path() / "cerl_ckpt_test.cfg1";
  SaveCheckpoint(ck, path.string());
  ExpectEqual(ck, LoadCheckpoint(path.string(), 0xfeedULL, 0xabcdef0123ULL));
  std::filesystem::remove(path);
  EXPECT_THROW(LoadCheckpoint(path.string()), CheckpointError);
}

TEST(CheckpointTest, LayoutAndDigestMismatchRefused) {
  const auto bytes = SerializeCheckpoint(Sample(false));
  EXPECT_THROW(DeserializeCheckpoint(bytes, 0xbeefULL), CheckpointError);
  EXPECT_THROW(DeserializeCheckpoint(bytes, std::nullopt, 1ULL), CheckpointError);
  EXPECT_NO_THROW(DeserializeCheckpoint(bytes, 0xfeedULL, 0xabcdef0123ULL));
}

TEST(CheckpointTest, TruncationAndCorruptionDetected) {
  const auto bytes = SerializeCheckpoint(Sample(true));
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(DeserializeCheckpoint(truncated), CheckpointError);
  for (std::size_t pos : {std::size_t{0}, std::size_t{5}, bytes.size() / 2,
                          bytes.size() - 1}) {
    auto flipped = bytes;
    flipped[pos] ^= 0x10;
    EXPECT_THROW(DeserializeCheckpoint(flipped), CheckpointError) << pos;
  }
  EXPECT_THROW(DeserializeCheckpoint({}), CheckpointError);
}

TEST(CheckpointTest, HeaderMagicAndVersion) {
  const auto bytes = SerializeCheckpoint(Sample(false));
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_EQ(bytes[0], 'C');
  EXPECT_EQ(bytes[1], 'F');
  EXPECT_EQ(bytes[2], 'G');
  EXPECT_EQ(bytes[3], '1');
  EXPECT_EQ(bytes[4], kCheckpointVersion);
}

}  // namespace
}  // namespace cerl
