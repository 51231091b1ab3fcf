#include "core/corpus.hpp"

namespace cluedex {

KnowledgeBase KnowledgeBase::ingest(const std::vector<RawDocument>& raw_docs,
                                    const TokenizerConfig& config) {
  if (raw_docs.empty()) {
    throw_error(ErrorCode::kInvalidArgument, "cannot ingest an empty corpus");
  }
  KnowledgeBase kb;
  kb.tokenizer_ = Tokenizer(config);
  kb.docs_.reserve(raw_docs.size());
  for (std::size_t i = 0; i < raw_docs.size(); ++i) {
    Document doc;
    doc.id = static_cast<std::uint32_t>(i);
    doc.title = raw_docs[i].title;
    doc.raw_text = raw_docs[i].text;
    doc.tokens = kb.tokenizer_.tokenize(raw_docs[i].text);
    if (doc.tokens.empty()) {
      std::string name = doc.title.empty() ? "#" + std::to_string(i) : doc.title;
      throw_error(ErrorCode::kInvalidArgument,
                  "document " + name + " tokenizes to an empty sequence");
    }
    kb.docs_.push_back(std::move(doc));
  }
  kb.tokenizer_.freeze();
  return kb;
}

const Document& KnowledgeBase::doc(std::uint32_t id) const {
  if (id >= docs_.size()) {
    throw_error(ErrorCode::kInvalidArgument, "doc id out of range: " + std::to_string(id));
  }
  return docs_[id];
}

std::uint64_t KnowledgeBase::total_tokens() const {
  std::uint64_t n = 0;
  for (const auto& d : docs_) n += d.tokens.size();
  return n;
}

void KnowledgeBase::save_sections(ContainerWriter& w) const {
  BinaryWriter meta;
  tokenizer_.save(meta);
  meta.u32(static_cast<std::uint32_t>(docs_.size()));
  w.add_section("kbmeta", std::move(meta));

  // Document table indexes into the title and token arenas.
  BinaryWriter table;
  BinaryWriter titles;
  BinaryWriter tokens;
  std::uint64_t title_off = 0;
  std::uint64_t token_off = 0;
  for (const auto& d : docs_) {
    table.u64(title_off);
    table.u32(static_cast<std::uint32_t>(d.title.size()));
    table.u64(token_off);
    table.u64(d.tokens.size());
    titles.bytes(d.title.data(), d.title.size());
    tokens.bytes(d.tokens.data(), d.tokens.size() * sizeof(TokenId));
    title_off += d.title.size();
    token_off += d.tokens.size();
  }
  w.add_section("doctab", std::move(table));
  w.add_section("titles", std::move(titles));
  w.add_section("tokens", std::move(tokens));
}

KnowledgeBase KnowledgeBase::load_sections(const ContainerReader& r) {
  KnowledgeBase kb;
  BinaryReader meta = r.section("kbmeta");
  kb.tokenizer_ = Tokenizer::load(meta);
  std::uint32_t doc_count = meta.u32();

  BinaryReader table = r.section("doctab");
  BinaryReader titles = r.section("titles");
  BinaryReader tokens = r.section("tokens");
  kb.docs_.reserve(doc_count);
  for (std::uint32_t i = 0; i < doc_count; ++i) {
    Document d;
    d.id = i;
    std::uint64_t title_off = table.u64();
    std::uint32_t title_len = table.u32();
    std::uint64_t token_off = table.u64();
    std::uint64_t token_len = table.u64();
    (void)title_off;
    (void)token_off;
    d.title.resize(title_len);
    if (title_len) titles.read_into(d.title.data(), title_len);
    d.tokens.resize(token_len);
    if (token_len) tokens.read_into(d.tokens.data(), token_len * sizeof(TokenId));
    d.raw_text = kb.tokenizer_.detokenize(d.tokens);
    kb.docs_.push_back(std::move(d));
  }
  return kb;
}

bool KnowledgeBase::structurally_equal(const KnowledgeBase& other) const {
  if (!(tokenizer_ == other.tokenizer_)) return false;
  if (docs_.size() != other.docs_.size()) return false;
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    if (docs_[i].id != other.docs_[i].id || docs_[i].title != other.docs_[i].title ||
        docs_[i].tokens != other.docs_[i].tokens) {
      return false;
    }
  }
  return true;
}

}  // namespace cluedex
