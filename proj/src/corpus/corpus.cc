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

#include "dualasr/corpus/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dualasr/common/seed.h"

namespace dualasr {

namespace fs = std::filesystem;

namespace {

std::string Join(const std::vector<std::string>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

void CheckTaskFields(const ManifestEntry& e) {
  const bool v = !e.verbatim.empty(), s = !e.subtitle.empty();
  const bool ok = (e.task == Task::kVerbatim && v && !s) ||
                  (e.task == Task::kSubtitled && !v && s) ||
                  (e.task == Task::kParallel && v && s);
  if (!ok) {
    throw std::runtime_error("utterance " + e.id + ": targets do not match task " +
                             TaskName(e.task));
  }
}

// Generation state shared by every utterance of one corpus.
struct Generator {
  const CorpusConfig& config;
  const Lexicon& lexicon;
  Features clean_protos;
  Features spont_protos;

  std::vector<std::string> SampleSentence(std::mt19937_64& rng) const {
    std::uniform_int_distribution<int> length(config.min_words, config.max_words);
    std::bernoulli_distribution function(0.4);
    const auto& fw = lexicon.function_words();
    const auto& cw = lexicon.content_words();
    std::vector<std::string> words(length(rng));
    for (auto& w : words) {
      if (function(rng)) {
        w = fw[std::uniform_int_distribution<size_t>(0, fw.size() - 1)(rng)];
      } else {
        w = cw[std::uniform_int_distribution<size_t>(0, cw.size() - 1)(rng)];
      }
    }
    return words;
  }

  // Spoken realization of a canonical sentence.
  std::vector<std::string> Speak(const std::vector<std::string>& canonical,
                                 bool spontaneous, std::mt19937_64& rng) const {
    if (!spontaneous) return canonical;
    std::bernoulli_distribution filler(config.p_filler), repeat(config.p_repeat),
        variant(config.p_variant);
    const auto& fillers = lexicon.fillers();
    std::vector<std::string> spoken;
    for (const auto& w : canonical) {
      if (filler(rng)) {
        spoken.push_back(fillers[std::uniform_int_distribution<size_t>(
            0, fillers.size() - 1)(rng)]);
      }
      std::string form = w;
      const auto& variants = lexicon.VariantsOf(w);
      if (!variants.empty() && variant(rng)) {
        form = variants[std::uniform_int_distribution<size_t>(0, variants.size() - 1)(rng)];
      }
      spoken.push_back(form);
      if (repeat(rng)) {
        const int extra = std::uniform_int_distribution<int>(1, 2)(rng);
        for (int i = 0; i < extra; ++i) spoken.push_back(form);
      }
    }
    return spoken;
  }

  Features Render(const std::vector<std::string>& words, bool spontaneous,
                  std::mt19937_64& rng) const {
    const std::vector<int> units = AcousticUnits(words);
    if (spontaneous) {
      return SynthesizeFeatures(units, spont_protos, config.spont_dur_min,
                                config.spont_dur_max, config.spont_noise, rng);
    }
    return SynthesizeFeatures(units, clean_protos, config.dur_min, config.dur_max,
                              config.noise, rng);
  }

  // Renders `words` between two neighboring context words and cuts the
  // segment with boundaries shifted by up to +-jitter frames.
  Features RenderJittered(const std::vector<std::string>& words,
                          std::mt19937_64& rng) const {
    const auto& sw = lexicon.standard_words();
    std::uniform_int_distribution<size_t> pick(0, sw.size() - 1);
    const Features before = Render({sw[pick(rng)]}, true, rng);
    const Features main = Render(words, true, rng);
    const Features after = Render({sw[pick(rng)]}, true, rng);
    std::uniform_int_distribution<int> shift(-config.jitter, config.jitter);
    const int total = before.frames + main.frames + after.frames;
    int start = before.frames + shift(rng);
    int end = before.frames + main.frames + shift(rng);
    start = std::clamp(start, 0, total - 1);
    end = std::clamp(end, start + 1, total);
    Features cut(end - start, main.dim);
    for (int t = start; t < end; ++t) {
      const Features* src = &before;
      int row = t;
      if (row >= before.frames) {
        row -= before.frames;
        src = &main;
        if (row >= main.frames) {
          row -= main.frames;
          src = &after;
        }
      }
      for (int k = 0; k < main.dim; ++k) cut.at(t - start, k) = src->at(row, k);
    }
    return cut;
  }
};

}  // namespace

const char* TaskName(Task task) {
  switch (task) {
    case Task::kVerbatim:
      return "verbatim";
    case Task::kSubtitled:
      return "subtitled";
    case Task::kParallel:
      return "parallel";
  }
  return "?";
}

Task ParseTask(const std::string& name) {
  if (name == "verbatim") return Task::kVerbatim;
  if (name == "subtitled") return Task::kSubtitled;
  if (name == "parallel") return Task::kParallel;
  throw std::invalid_argument("unknown task '" + name + "'");
}

std::vector<ManifestEntry> ReadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = SplitTabs(line);
    if (f.size() != 5 && f.size() != 6) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 5 or 6 tab-separated fields");
    }
    ManifestEntry e;
    e.id = f[0];
    const fs::path feat(f[1]);
    e.feature_path = feat.is_absolute() ? feat.string() : (base / feat).string();
    e.task = ParseTask(f[2]);
    e.verbatim = f[3];
    e.subtitle = f[4];
    if (f.size() == 6) e.provenance = f[5];
    CheckTaskFields(e);
    entries.push_back(std::move(e));
  }
  return entries;
}

void WriteManifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  const fs::path base = fs::absolute(fs::path(path)).parent_path();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path);
  for (const auto& e : entries) {
    CheckTaskFields(e);
    std::string feat = e.feature_path;
    std::error_code ec;
    const fs::path rel = fs::relative(fs::absolute(fs::path(feat)), base, ec);
    if (!ec && !rel.empty()) feat = rel.string();
    out << e.id << '\t' << feat << '\t' << TaskName(e.task) << '\t' << e.verbatim << '\t'
        << e.subtitle;
    if (e.provenance != "-") out << '\t' << e.provenance;
    out << '\n';
  }
  if (!out) throw std::runtime_error("short write to " + path);
}

void CorpusConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("corpus config: ") + what);
  };
  require(lexicon_words >= 1, "lexicon_words must be >= 1");
  require(verbatim_train >= 0 && subtitle_train >= 0 && clean_dev >= 0 && spont_annot >= 0,
          "split sizes must be non-negative");
  require(min_words >= 1 && max_words >= min_words, "invalid sentence length range");
  require(feat_dim >= 1, "feat_dim must be >= 1");
  require(dur_min >= 1 && dur_max >= dur_min, "invalid clean duration range");
  require(spont_dur_min >= 1 && spont_dur_max >= spont_dur_min,
          "invalid spontaneous duration range");
  require(noise >= 0 && spont_noise >= 0 && channel >= 0, "noise levels must be >= 0");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  require(prob(spont_fraction) && prob(p_filler) && prob(p_repeat) && prob(p_variant) &&
              prob(p_compress),
          "probabilities must lie in [0, 1]");
  require(p_compress < 1.0, "p_compress must be < 1");
  require(jitter >= 0, "jitter must be >= 0");
}

std::vector<int> AcousticUnits(const std::vector<std::string>& words) {
  std::vector<int> units = {kSilenceUnit};
  for (const auto& w : words) {
    for (char c : w) {
      if (c >= 'a' && c <= 'z') {
        units.push_back(c - 'a');
      } else if (c == '\'') {
        units.push_back(26);
      } else {
        throw std::invalid_argument("no acoustic unit for character in '" + w + "'");
      }
    }
    units.push_back(kSilenceUnit);
  }
  return units;
}

SyntheticCorpus GenerateCorpus(const CorpusConfig& config, uint64_t seed) {
  config.Validate();
  SyntheticCorpus corpus{Lexicon::Build(config.lexicon_words, DeriveSeed(seed, {1})), {}};
  Generator gen{config, corpus.lexicon,
                MakePrototypes(kNumAcousticUnits, config.feat_dim, DeriveSeed(seed, {2})),
                Features()};
  // Spontaneous channel: prototypes pass through I + channel * R.
  {
    std::mt19937_64 rng(DeriveSeed(seed, {3}));
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(config.feat_dim));
    const int d = config.feat_dim;
    std::vector<double> mix(static_cast<size_t>(d) * d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) mix[i * d + j] = (i == j) + config.channel * normal(rng);
    }
    gen.spont_protos = Features(kNumAcousticUnits, d);
    for (int u = 0; u < kNumAcousticUnits; ++u) {
      for (int j = 0; j < d; ++j) {
        double v = 0.0;
        for (int i = 0; i < d; ++i) v += gen.clean_protos.at(u, i) * mix[i * d + j];
        gen.spont_protos.at(u, j) = v;
      }
    }
  }

  const std::vector<std::pair<std::string, int>> sizes = {
      {"verbatim-train", config.verbatim_train},
      {"subtitle-train", config.subtitle_train},
      {"clean-dev", config.clean_dev},
      {"spont-annot", config.spont_annot}};
  const char* const prefixes[] = {"vt", "st", "cd", "sa"};
  for (size_t s = 0; s < sizes.size(); ++s) {
    auto& split = corpus.splits[sizes[s].first];
    for (int i = 0; i < sizes[s].second; ++i) {
      std::mt19937_64 rng(DeriveSeed(seed, {100 + s, static_cast<uint64_t>(i)}));
      bool spontaneous = s != 2;
      if (s == 0) spontaneous = std::bernoulli_distribution(config.spont_fraction)(rng);
      std::vector<std::string> spoken, edited;
      do {
        spoken = gen.Speak(gen.SampleSentence(rng), spontaneous, rng);
        edited = SubtitleEdit(spoken, corpus.lexicon, config.p_compress, rng);
      } while (edited.empty());

      char id[32];
      std::snprintf(id, sizeof(id), "%s-%06d", prefixes[s], i);
      CorpusUtterance u;
      u.entry.id = id;
      u.entry.feature_path = std::string("feats/") + id + ".f32";
      switch (s) {
        case 0:
        case 2:
          u.entry.task = Task::kVerbatim;
          u.entry.verbatim = Join(spoken);
          break;
        case 1:
          u.entry.task = Task::kSubtitled;
          u.entry.subtitle = Join(edited);
          break;
        default:
          u.entry.task = Task::kParallel;
          u.entry.verbatim = Join(spoken);
          u.entry.subtitle = Join(edited);
      }
      u.features = s == 1 && config.jitter > 0 ? gen.RenderJittered(spoken, rng)
                                               : gen.Render(spoken, spontaneous, rng);
      split.push_back(std::move(u));
    }
  }
  return corpus;
}

void WriteCorpus(const SyntheticCorpus& corpus, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "feats");
  for (const auto& [name, utts] : corpus.splits) {
    std::vector<ManifestEntry> entries;
    for (const auto& u : utts) {
      ManifestEntry e = u.entry;
      e.feature_path = (fs::path(dir) / e.feature_path).string();
      WriteFeatureFile(e.feature_path, u.features);
      entries.push_back(std::move(e));
    }
    WriteManifest((fs::path(dir) / (name + ".tsv")).string(), entries);
  }
}

}  // namespace dualasr
