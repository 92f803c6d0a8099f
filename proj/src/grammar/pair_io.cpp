#include "granno/grammar/pair_io.hpp"

#include <algorithm>
#include <memory>
#include <optional>
#include <queue>

#include <json.hpp>

namespace granno {

namespace {

// Ties on (canonical, lf) put the shallower derivation first.
bool write_order(const GeneratedPair& a, const GeneratedPair& b) {
  if (pair_less(a, b)) return true;
  if (pair_less(b, a)) return false;
  return a.depth < b.depth;
}

}  // namespace

std::string pair_to_json_line(const GeneratedPair& pair) {
  nlohmann::json j{{"canonical", pair.canonical}, {"lf", pair.lf.str()}, {"depth", pair.depth}};
  return j.dump();
}

GeneratedPair pair_from_json_line(const std::string& line) {
  try {
    auto j = nlohmann::json::parse(line);
    return {j.at("canonical").get<std::string>(), LogicalForm::parse(j.at("lf").get<std::string>()),
            j.value("depth", size_t{0})};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("generated pair: ") + e.what());
  }
}

std::vector<GeneratedPair> read_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<GeneratedPair> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(pair_from_json_line(line));
  }
  return out;
}

SortedPairWriter::SortedPairWriter(std::filesystem::path out, size_t max_in_memory)
    : out_(std::move(out)), max_in_memory_(std::max<size_t>(1, max_in_memory)) {}

SortedPairWriter::~SortedPairWriter() {
  std::error_code ec;
  for (const auto& r : runs_) std::filesystem::remove(r, ec);
}

void SortedPairWriter::add(GeneratedPair pair) {
  buffer_.push_back(std::move(pair));
  if (buffer_.size() >= max_in_memory_) spill();
}

void SortedPairWriter::spill() {
  std::sort(buffer_.begin(), buffer_.end(), write_order);
  auto path = out_;
  path += ".run" + std::to_string(runs_.size());
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  for (const auto& p : buffer_) f << pair_to_json_line(p) << '\n';
  if (!f) throw Error("write failed: " + path.string());
  runs_.push_back(path);
  buffer_.clear();
}

size_t SortedPairWriter::finish() {
  if (finished_) throw Error("SortedPairWriter::finish called twice");
  finished_ = true;
  std::ofstream out(out_);
  if (!out) throw Error("cannot write " + out_.string());

  std::sort(buffer_.begin(), buffer_.end(), write_order);
  // K-way merge over the spilled runs plus the in-memory tail.
  struct Source {
    std::unique_ptr<std::ifstream> file;
    size_t next = 0;
  };
  std::vector<Source> sources;
  for (const auto& r : runs_) {
    sources.push_back({std::make_unique<std::ifstream>(r), 0});
  }
  const size_t memory_source = sources.size();
  sources.push_back({nullptr, 0});

  auto pull = [&](size_t s) -> std::optional<GeneratedPair> {
    if (s == memory_source) {
      if (sources[s].next >= buffer_.size()) return std::nullopt;
      return buffer_[sources[s].next++];
    }
    std::string line;
    if (!std::getline(*sources[s].file, line)) return std::nullopt;
    return pair_from_json_line(line);
  };

  using Head = std::pair<GeneratedPair, size_t>;
  auto greater = [](const Head& a, const Head& b) { return write_order(b.first, a.first); };
  std::priority_queue<Head, std::vector<Head>, decltype(greater)> heap(greater);
  for (size_t s = 0; s < sources.size(); ++s) {
    if (auto p = pull(s)) heap.emplace(std::move(*p), s);
  }

  size_t written = 0;
  std::optional<GeneratedPair> last;
  while (!heap.empty()) {
    auto [pair, s] = heap.top();
    heap.pop();
    if (auto p = pull(s)) heap.emplace(std::move(*p), s);
    if (last && last->key() == pair.key()) {
      continue;
    }
    out << pair_to_json_line(pair) << '\n';
    ++written;
    last = std::move(pair);
  }
  if (!out) throw Error("write failed: " + out_.string());
  return written;
}

}  // namespace granno
