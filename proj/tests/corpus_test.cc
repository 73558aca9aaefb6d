// Copyright (c) 2026 The dualasr Authors. All Rights Reserved.
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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gtest/gtest.h"
#include "dualasr/corpus/batching.h"
#include "dualasr/corpus/corpus.h"
#include "dualasr/corpus/features.h"
#include "dualasr/corpus/lexicon.h"

namespace dualasr {
namespace {

namespace fs = std::filesystem;

using Words = std::vector<std::string>;

std::string TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dualasr_corpus_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CorpusConfig SmallConfig() {
  CorpusConfig c;
  c.lexicon_words = 10;
  c.verbatim_train = 12;
  c.subtitle_train = 20;
  c.clean_dev = 5;
  c.spont_annot = 7;
  return c;
}

const Lexicon& TestLexicon() {
  static const Lexicon lex = Lexicon::Build(20, 3);
  return lex;
}

TEST(LexiconTest, VariantsMapIntoStandardWords) {
  const Lexicon& lex = TestLexicon();
  const std::set<std::string> standard(lex.standard_words().begin(),
                                       lex.standard_words().end());
  EXPECT_EQ(lex.content_words().size(), 8u + 20u);
  for (const auto& [variant, word] : lex.variants()) {
    EXPECT_TRUE(standard.count(word)) << variant << " -> " << word;
    EXPECT_FALSE(standard.count(variant)) << variant;
  }
  EXPECT_EQ(lex.Standardize("gij"), "jij");
  EXPECT_EQ(lex.Standardize("'t"), "het");
  EXPECT_EQ(lex.Standardize("goed"), "goed");
  EXPECT_TRUE(lex.IsFiller("uh"));
  EXPECT_FALSE(lex.IsFiller("ja"));
}

TEST(SubtitleEditTest, EditPatterns) {
  const Lexicon& lex = TestLexicon();
  std::mt19937_64 rng(1);
  EXPECT_EQ(SubtitleEdit({"'t", "is", "uh", "goed"}, lex, 0.0, rng),
            (Words{"het", "is", "goed"}));
  EXPECT_EQ(SubtitleEdit({"ja", "ja", "ja"}, lex, 0.0, rng), (Words{"ja"}));
  EXPECT_EQ(SubtitleEdit({"gij", "komt"}, lex, 0.0, rng), (Words{"jij", "komt"}));
  EXPECT_EQ(SubtitleEdit({"het", "is", "uh", "uh", "goed"}, lex, 0.0, rng),
            (Words{"het", "is", "goed"}));
  EXPECT_TRUE(SubtitleEdit({"uh", "ehm"}, lex, 0.0, rng).empty());
}

TEST(SubtitleEditTest, RepetitionsCollapseAcrossFillers) {
  std::mt19937_64 rng(1);
  EXPECT_EQ(SubtitleEdit({"ik", "uh", "ik", "kom"}, TestLexicon(), 0.0, rng),
            (Words{"ik", "kom"}));
}

TEST(SubtitleEditTest, NeverLongerAndOnlyDropsFunctionWords) {
  const Lexicon& lex = TestLexicon();
  std::mt19937_64 rng(7);
  std::vector<std::string> pool = lex.standard_words();
  for (const auto& f : lex.fillers()) pool.push_back(f);
  for (const auto& [v, w] : lex.variants()) pool.push_back(v);
  for (int trial = 0; trial < 300; ++trial) {
    Words spoken(1 + trial % 9);
    for (auto& w : spoken) {
      w = pool[std::uniform_int_distribution<size_t>(0, pool.size() - 1)(rng)];
    }
    std::mt19937_64 a(trial), b(trial);
    const Words none = SubtitleEdit(spoken, lex, 0.0, a);
    const Words some = SubtitleEdit(spoken, lex, 0.5, b);
    EXPECT_LE(none.size(), spoken.size());
    EXPECT_LE(some.size(), none.size());
    // Compression removes a subsequence of function words.
    size_t j = 0;
    for (const auto& w : none) {
      if (j < some.size() && some[j] == w) {
        ++j;
      } else {
        EXPECT_TRUE(lex.IsFunctionWord(w)) << w;
      }
    }
    EXPECT_EQ(j, some.size());
    for (const auto& w : none) EXPECT_FALSE(lex.IsFiller(w));
  }
}

TEST(FeaturesTest, NoiselessUnitDuration) {
  const Features protos = MakePrototypes(5, 4, 11);
  std::mt19937_64 rng(0);
  const std::vector<int> units = {3, 0, 3};
  const Features x = SynthesizeFeatures(units, protos, 1, 1, 0.0, rng);
  ASSERT_EQ(x.frames, 3);
  for (int t = 0; t < 3; ++t) {
    for (int k = 0; k < 4; ++k) EXPECT_EQ(x.at(t, k), protos.at(units[t], k));
  }
}

TEST(FeaturesTest, DurationBounds) {
  const Features protos = MakePrototypes(5, 4, 11);
  for (int seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    const std::vector<int> units = {1, 2, 3};
    const Features x = SynthesizeFeatures(units, protos, 2, 4, 0.3, rng);
    EXPECT_GE(x.frames, 6);
    EXPECT_LE(x.frames, 12);
  }
}

TEST(FeaturesTest, Normalization) {
  Features x(6, 3);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(3.0, 2.0);
  for (int t = 0; t < 6; ++t) {
    x.at(t, 0) = 7.5;
    x.at(t, 1) = normal(rng);
    x.at(t, 2) = normal(rng) * 100;
  }
  const Features y = NormalizeUtterance(x);
  for (int t = 0; t < 6; ++t) EXPECT_EQ(y.at(t, 0), 0.0);
  for (int k = 1; k < 3; ++k) {
    double mean = 0, var = 0;
    for (int t = 0; t < 6; ++t) mean += y.at(t, k);
    mean /= 6;
    for (int t = 0; t < 6; ++t) var += (y.at(t, k) - mean) * (y.at(t, k) - mean);
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_NEAR(var / 6, 1.0, 1e-9);
  }
  const Features z = NormalizeUtterance(y);
  for (size_t i = 0; i < y.data.size(); ++i) EXPECT_NEAR(z.data[i], y.data[i], 1e-9);
}

TEST(FeaturesTest, SpecAugmentContract) {
  const Features protos = MakePrototypes(6, 8, 2);
  std::mt19937_64 gen(3);
  const Features x = SynthesizeFeatures(std::vector<int>{0, 1, 2, 3, 4, 5}, protos, 2, 3,
                                        0.5, gen);
  std::mt19937_64 rng(1);
  EXPECT_EQ(SpecAugment(x, {0, 4, 0, 2}, rng), x);

  for (int seed = 0; seed < 30; ++seed) {
    std::mt19937_64 r(seed);
    const Features y = SpecAugment(x, {1, 4, 0, 0}, r);
    int changed = 0;
    for (size_t i = 0; i < x.data.size(); ++i) changed += x.data[i] != y.data[i];
    EXPECT_LE(changed, 4 * x.dim);
    EXPECT_EQ(y.frames, x.frames);
  }
  std::mt19937_64 a(9), b(9);
  EXPECT_EQ(SpecAugment(x, {2, 3, 2, 3}, a), SpecAugment(x, {2, 3, 2, 3}, b));
  EXPECT_THROW(SpecAugment(x, {1, x.frames + 1, 0, 0}, a), std::invalid_argument);
}

TEST(FeaturesTest, FileRoundTrip) {
  const std::string dir = TempDir("feat");
  const Features x = MakePrototypes(7, 5, 4);
  WriteFeatureFile(dir + "/x.f32", x);
  const Features y = ReadFeatureFile(dir + "/x.f32");
  ASSERT_EQ(y.frames, 7);
  ASSERT_EQ(y.dim, 5);
  for (size_t i = 0; i < x.data.size(); ++i) {
    EXPECT_EQ(y.data[i], static_cast<double>(static_cast<float>(x.data[i])));
  }
  EXPECT_EQ(fs::file_size(dir + "/x.f32"), 8u + 35u * 4u);
  std::ofstream(dir + "/bad.f32") << "xy";
  EXPECT_THROW(ReadFeatureFile(dir + "/bad.f32"), std::runtime_error);
}

TEST(CorpusTest, SplitsAndTasks) {
  const SyntheticCorpus corpus = GenerateCorpus(SmallConfig(), 42);
  ASSERT_EQ(corpus.splits.size(), 4u);
  EXPECT_EQ(corpus.splits.at("verbatim-train").size(), 12u);
  EXPECT_EQ(corpus.splits.at("subtitle-train").size(), 20u);
  for (const auto& u : corpus.splits.at("subtitle-train")) {
    EXPECT_EQ(u.entry.task, Task::kSubtitled);
    EXPECT_FALSE(u.entry.subtitle.empty());
    EXPECT_TRUE(u.entry.verbatim.empty());
  }
  for (const auto& u : corpus.splits.at("clean-dev")) {
    EXPECT_EQ(u.entry.task, Task::kVerbatim);
    for (const auto& w : SplitWords(u.entry.verbatim)) {
      EXPECT_FALSE(corpus.lexicon.IsFiller(w));
    }
  }
  for (const auto& u : corpus.splits.at("spont-annot")) {
    EXPECT_EQ(u.entry.task, Task::kParallel);
    std::mt19937_64 rng(0);
    const Words edited =
        SubtitleEdit(SplitWords(u.entry.verbatim), corpus.lexicon, 0.0, rng);
    EXPECT_LE(SplitWords(u.entry.subtitle).size(), edited.size());
  }
  for (const auto& [name, split] : corpus.splits) {
    for (const auto& u : split) {
      EXPECT_GE(u.features.frames, 1);
      for (double v : u.features.data) ASSERT_TRUE(std::isfinite(v));
    }
  }
}

TEST(CorpusTest, DeterministicBytes) {
  const std::string a = TempDir("det_a"), b = TempDir("det_b");
  WriteCorpus(GenerateCorpus(SmallConfig(), 5), a);
  WriteCorpus(GenerateCorpus(SmallConfig(), 5), b);
  for (const auto& name : SplitNames()) {
    EXPECT_EQ(Slurp(fs::path(a) / (name + ".tsv")), Slurp(fs::path(b) / (name + ".tsv")));
  }
  for (const auto& entry : fs::directory_iterator(fs::path(a) / "feats")) {
    EXPECT_EQ(Slurp(entry.path()),
              Slurp(fs::path(b) / "feats" / entry.path().filename()));
  }
  EXPECT_NE(Slurp(fs::path(a) / "clean-dev.tsv"),
            [&] {
              const std::string c = TempDir("det_c");
              WriteCorpus(GenerateCorpus(SmallConfig(), 6), c);
              return Slurp(fs::path(c) / "clean-dev.tsv");
            }());
}

TEST(CorpusTest, JitterChangesSubtitleSegments) {
  CorpusConfig c = SmallConfig();
  c.jitter = 0;
  const auto still = GenerateCorpus(c, 8);
  c.jitter = 4;
  const auto shaken = GenerateCorpus(c, 8);
  int differ = 0;
  for (size_t i = 0; i < still.splits.at("subtitle-train").size(); ++i) {
    differ += still.splits.at("subtitle-train")[i].features.frames !=
              shaken.splits.at("subtitle-train")[i].features.frames;
  }
  EXPECT_GT(differ, 0);
  // Splits without jitter are untouched.
  EXPECT_EQ(still.splits.at("clean-dev")[0].features, shaken.splits.at("clean-dev")[0].features);
}

TEST(CorpusTest, InvalidConfig) {
  CorpusConfig c = SmallConfig();
  c.max_words = 0;
  EXPECT_THROW(GenerateCorpus(c, 1), std::invalid_argument);
  c = SmallConfig();
  c.p_filler = 1.5;
  EXPECT_THROW(GenerateCorpus(c, 1), std::invalid_argument);
}

TEST(ManifestTest, RoundTripAndProvenance) {
  const std::string dir = TempDir("manifest");
  WriteCorpus(GenerateCorpus(SmallConfig(), 9), dir);
  auto entries = ReadManifest(dir + "/spont-annot.tsv");
  ASSERT_EQ(entries.size(), 7u);
  EXPECT_TRUE(fs::exists(entries[0].feature_path));
  entries[0].provenance = "pseudo-subtitle";
  fs::create_directories(dir + "/other");
  WriteManifest(dir + "/other/copy.tsv", entries);
  const auto again = ReadManifest(dir + "/other/copy.tsv");
  ASSERT_EQ(again.size(), entries.size());
  for (size_t i = 0; i < entries.size(); ++i) {
    EXPECT_EQ(fs::canonical(again[i].feature_path), fs::canonical(entries[i].feature_path));
    EXPECT_EQ(again[i].verbatim, entries[i].verbatim);
    EXPECT_EQ(again[i].provenance, entries[i].provenance);
  }
  std::ofstream(dir + "/bad.tsv") << "id\tx.f32\tverbatim\t\tsub\n";
  EXPECT_THROW(ReadManifest(dir + "/bad.tsv"), std::runtime_error);
}

class BatchingTest : public ::testing::Test {
 protected:
  void SetUp() override {
    CorpusConfig c = SmallConfig();
    c.verbatim_train = 40;
    c.subtitle_train = 70;
    corpus_ = GenerateCorpus(c, 21);
    std::vector<std::string> v, s;
    for (const auto& u : corpus_.splits.at("verbatim-train")) v.push_back(u.entry.verbatim);
    for (const auto& u : corpus_.splits.at("subtitle-train")) s.push_back(u.entry.subtitle);
    vocab_ = Vocabulary::TrainBpe(v, s, 80);
    pool_ = TokenizeSplit(corpus_.splits.at("verbatim-train"), vocab_);
    auto subs = TokenizeSplit(corpus_.splits.at("subtitle-train"), vocab_);
    pool_.insert(pool_.end(), subs.begin(), subs.end());
  }

  SyntheticCorpus corpus_;
  Vocabulary vocab_;
  std::vector<Utterance> pool_;
};

TEST_F(BatchingTest, EqualMixHalves) {
  BatchOptions opt;
  opt.batch_size = 32;
  const auto batches = MakeBatches(pool_, opt, 3);
  // 70 subtitled utterances at 16 per batch.
  EXPECT_EQ(batches.size(), 5u);
  for (const auto& b : batches) {
    EXPECT_EQ(b.size, 32);
    EXPECT_EQ(b.CountVerbatim(), 16);
    EXPECT_EQ(b.CountSubtitle(), 16);
    for (int i = 0; i < b.size; ++i) {
      EXPECT_EQ(b.has_verbatim[i], b.tasks[i] == Task::kVerbatim);
      EXPECT_EQ(b.has_subtitle[i], b.tasks[i] == Task::kSubtitled);
    }
  }
}

TEST_F(BatchingTest, OddAndUnitBatchSizes) {
  BatchOptions opt;
  opt.batch_size = 1;
  auto batches = MakeBatches(pool_, opt, 3);
  for (size_t n = 0; n < batches.size(); ++n) {
    EXPECT_EQ(batches[n].CountVerbatim(), n % 2 == 0 ? 1 : 0);
  }
  opt.batch_size = 5;
  batches = MakeBatches(pool_, opt, 3);
  for (const auto& b : batches) {
    EXPECT_LE(std::abs(b.CountVerbatim() - b.CountSubtitle()), 1);
  }
}

TEST_F(BatchingTest, SingleTaskStreams) {
  BatchOptions opt;
  opt.batch_size = 8;
  opt.mixing = Mixing::kVerbatimOnly;
  auto batches = MakeBatches(pool_, opt, 1);
  int total = 0;
  for (const auto& b : batches) {
    EXPECT_EQ(b.CountSubtitle(), 0);
    EXPECT_EQ(b.CountVerbatim(), b.size);
    total += b.size;
  }
  EXPECT_EQ(total, 40);
  opt.mixing = Mixing::kSubtitleOnly;
  for (const auto& b : MakeBatches(pool_, opt, 1)) EXPECT_EQ(b.CountVerbatim(), 0);
  std::vector<Utterance> only_verbatim(pool_.begin(), pool_.begin() + 40);
  opt.mixing = Mixing::kEqualMix;
  EXPECT_THROW(MakeBatches(only_verbatim, opt, 1), std::invalid_argument);
}

TEST_F(BatchingTest, PaddingAndViews) {
  BatchOptions opt;
  opt.batch_size = 6;
  const auto batches = MakeBatches(pool_, opt, 4);
  const Batch& b = batches[0];
  for (int i = 0; i < b.size; ++i) {
    const Features f = b.FeaturesOf(i);
    EXPECT_EQ(f.frames, b.frames[i]);
    for (int t = b.frames[i]; t < b.max_frames; ++t) {
      for (int k = 0; k < b.dim; ++k) {
        EXPECT_EQ(b.features[(static_cast<size_t>(i) * b.max_frames + t) * b.dim + k], 0.0);
      }
    }
    if (b.has_verbatim[i]) {
      for (int t = b.verbatim_lengths[i]; t < b.max_verbatim; ++t) {
        EXPECT_EQ(b.verbatim[i * b.max_verbatim + t], Vocabulary::kPad);
      }
    }
  }
  const auto same = MakeBatches(pool_, opt, 4);
  EXPECT_EQ(same[0].ids, b.ids);
  EXPECT_NE(MakeBatches(pool_, opt, 5)[0].ids, b.ids);
}

}  // namespace
}  // namespace dualasr
