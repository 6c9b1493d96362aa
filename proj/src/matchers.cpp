#include "swasr/matchers.hpp"

#include "swasr/edit_distance.hpp"
#include "swasr/random.hpp"
#include "swasr/text.hpp"
#include "swasr/timing.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <limits>

namespace swasr {
namespace {

constexpr char32_t kWordStart = 0x02;
constexpr char32_t kWordEnd = 0x03;
// Scores closer than this are treated as ties and resolved by vocabulary order.
constexpr double kTieTolerance = 1e-12;

std::string join_context(std::string_view context, std::string_view text) {
  if (context.empty()) return std::string(text);
  std::string joined(context);
  joined += ' ';
  joined += text;
  return joined;
}

Eigen::VectorXd canonical(Eigen::Index dim) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  e[0] = 1.0;
  return e;
}

Eigen::VectorXd unit_or_canonical(Eigen::VectorXd v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) return canonical(v.size());
  return v / n;
}

std::uint64_t trigram_hash(char32_t a, char32_t b, char32_t c) {
  std::array<char, 12> bytes{};
  const char32_t cps[3] = {a, b, c};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) bytes[std::size_t(4 * i + j)] = char((std::uint32_t(cps[i]) >> (8 * j)) & 0xFF);
  return splitmix64(fnv1a64(std::string_view(bytes.data(), bytes.size())));
}

}  // namespace

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  if (words.empty()) throw VocabularyError("vocabulary must not be empty");
  for (const auto& raw : words) {
    std::string w = fold_trim(raw);
    if (w.empty()) throw VocabularyError("vocabulary entries must not be blank");
    if (index_.contains(w)) throw VocabularyError("duplicate vocabulary entry after folding: '" + w + "'");
    index_.emplace(w, words_.size());
    code_points_.push_back(to_code_points(w));
    words_.push_back(std::move(w));
  }
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string word = trim(line);
    if (!word.empty()) words.push_back(std::move(word));
  }
  return Vocabulary(words);
}

std::optional<std::size_t> Vocabulary::find(std::string_view folded) const {
  const auto it = index_.find(std::string(folded));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string mode_name(MatchMode mode) {
  switch (mode) {
    case MatchMode::hybrid_raw: return "hybrid-raw";
    case MatchMode::cosine: return "cosine";
    case MatchMode::levenshtein: return "levenshtein";
    case MatchMode::llm: return "llm";
    case MatchMode::cosine_context: return "cosine+context";
    case MatchMode::llm_context: return "llm+context";
    case MatchMode::llm_context_fewshot: return "llm+context+fewshot";
  }
  return "unknown";
}

std::string mode_label(MatchMode mode) {
  switch (mode) {
    case MatchMode::hybrid_raw: return "Hybrid";
    case MatchMode::cosine: return "CS";
    case MatchMode::levenshtein: return "LS";
    case MatchMode::llm: return "LLM";
    case MatchMode::cosine_context: return "CS+C";
    case MatchMode::llm_context: return "LLM+C";
    case MatchMode::llm_context_fewshot: return "LLM+C+FS";
  }
  return "unknown";
}

MatchMode parse_mode(std::string_view text) {
  std::string key;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) key += char(std::tolower(static_cast<unsigned char>(c)));
  for (MatchMode m : kAllModes) {
    std::string label = mode_label(m);
    for (auto& c : label) c = char(std::tolower(static_cast<unsigned char>(c)));
    if (key == mode_name(m) || key == label) return m;
  }
  if (key == "hybrid") return MatchMode::hybrid_raw;
  throw InvalidArgument("unknown mode '" + std::string(text) + "'");
}

bool is_llm_mode(MatchMode mode) {
  return mode == MatchMode::llm || mode == MatchMode::llm_context || mode == MatchMode::llm_context_fewshot;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return edit_distance(to_code_points(a), to_code_points(b));
}

MatchDecision match_levenshtein(std::string_view transcript, const Vocabulary& vocab) {
  Stopwatch sw;
  const std::u32string query = to_code_points(fold_trim(transcript));
  std::size_t best = 0;
  std::size_t best_distance = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const std::size_t d = edit_distance(query, vocab.code_points(i));
    if (d < best_distance) {
      best = i;
      best_distance = d;
    }
  }
  MatchDecision decision;
  decision.word = vocab[best];
  decision.score = double(best_distance);
  decision.mode = MatchMode::levenshtein;
  decision.raw_transcript = std::string(transcript);
  decision.latency_ms = sw.elapsed_ms();
  return decision;
}

Eigen::VectorXd embed_char_ngrams(std::string_view text, Eigen::Index dim) {
  if (dim <= 0) throw InvalidArgument("embedding dimension must be positive");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  for (const auto& word : split_whitespace(fold(text))) {
    std::u32string padded;
    padded.push_back(kWordStart);
    padded += to_code_points(word);
    padded.push_back(kWordEnd);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      const std::uint64_t h = trigram_hash(padded[i], padded[i + 1], padded[i + 2]);
      const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim));
      v[bucket] += (h >> 63) ? -1.0 : 1.0;
    }
  }
  return unit_or_canonical(std::move(v));
}

CosineMatcher::CosineMatcher(const Vocabulary& vocab, std::shared_ptr<const EmbeddingProvider> provider,
                             std::string context)
    : vocab_(vocab), provider_(std::move(provider)), context_(std::move(context)) {
  if (!provider_) throw InvalidArgument("CosineMatcher needs an embedding provider");
  candidates_.resize(provider_->dimension(), static_cast<Eigen::Index>(vocab_.size()));
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    candidates_.col(static_cast<Eigen::Index>(i)) = unit_or_canonical(provider_->embed(join_context(context_, vocab_[i])));
  }
}

MatchDecision CosineMatcher::match(std::string_view transcript) const {
  Stopwatch sw;
  const Eigen::VectorXd query = unit_or_canonical(provider_->embed(join_context(context_, fold_trim(transcript))));
  const Eigen::VectorXd scores = candidates_.transpose() * query;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best] + kTieTolerance) best = i;

  MatchDecision decision;
  decision.word = vocab_[std::size_t(best)];
  decision.score = std::clamp(scores[best], -1.0, 1.0);
  decision.mode = context_.empty() ? MatchMode::cosine : MatchMode::cosine_context;
  decision.raw_transcript = std::string(transcript);
  decision.latency_ms = sw.elapsed_ms();
  return decision;
}

MatchDecision match_cosine(std::string_view transcript, const Vocabulary& vocab, const EmbeddingProvider& provider) {
  // Non-owning handle; the matcher does not outlive this call.
  const std::shared_ptr<const EmbeddingProvider> handle(&provider, [](const EmbeddingProvider*) {});
  return CosineMatcher(vocab, handle).match(transcript);
}

MatchDecision match_cosine_context(std::string_view transcript, const Vocabulary& vocab, std::string_view context,
                                   const EmbeddingProvider& provider) {
  const std::shared_ptr<const EmbeddingProvider> handle(&provider, [](const EmbeddingProvider*) {});
  auto decision = CosineMatcher(vocab, handle, std::string(context)).match(transcript);
  decision.mode = MatchMode::cosine_context;
  return decision;
}

std::string project_to_vocab(std::string_view text, const Vocabulary& vocab) {
  const std::string folded = fold_trim(text);
  if (auto i = vocab.find(folded)) return vocab[*i];
  for (const auto& token : split_whitespace(folded)) {
    if (auto i = vocab.find(strip_punctuation(token))) return vocab[*i];
  }
  return match_levenshtein(folded, vocab).word;
}

}  // namespace swasr
