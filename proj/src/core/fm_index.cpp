#include "core/fm_index.hpp"

#include <algorithm>

#include "core/log.hpp"
#include "core/suffix_array.hpp"

namespace cluedex {

FmIndex FmIndex::build(const KnowledgeBase& kb, std::uint32_t sample_rate) {
  if (sample_rate == 0) {
    throw_error(ErrorCode::kInvalidArgument, "suffix array sample rate must be at least 1");
  }
  FmIndex fm;
  fm.num_docs_ = kb.size();
  fm.sample_rate_ = sample_rate;
  fm.sigma_ = kb.tokenizer().vocab_size() + 1;

  fm.doc_starts_.resize(kb.size());
  std::uint64_t n = 0;
  for (const Document& d : kb.docs()) {
    fm.doc_starts_[d.id] = n;
    n += d.tokens.size() + 1;  // the separator after the document belongs to it
  }
  fm.n_ = n;

  // Index the reversed stream with a trailing sentinel: appending a token
  // to a forward pattern is then one backward-search step.
  std::vector<std::uint32_t> x;
  x.reserve(n + 1);
  for (std::uint32_t d = kb.size(); d-- > 0;) {
    const std::vector<TokenId>& toks = kb.doc(d).tokens;
    x.push_back(kSepToken + 1);
    for (std::size_t i = toks.size(); i-- > 0;) x.push_back(toks[i] + 1);
  }
  x.push_back(0);

  std::vector<std::uint64_t> sa = build_suffix_array(x, fm.sigma_);
  if (sa[0] != n) throw_error(ErrorCode::kRuntime, "suffix array construction failed");

  std::vector<std::uint64_t> counts(fm.sigma_ + 1, 0);
  for (std::uint32_t sym : x) ++counts[sym];
  fm.c_.assign(fm.sigma_ + 1, 0);
  for (std::uint32_t a = 0; a < fm.sigma_; ++a) fm.c_[a + 1] = fm.c_[a] + counts[a];

  std::vector<std::uint32_t> bwt(n + 1);
  for (std::uint64_t r = 0; r <= n; ++r) {
    bwt[r] = sa[r] == 0 ? x[n] : x[sa[r] - 1];
  }

  // Row r (r >= 1) corresponds to the forward end position n-1-SA[r]; the
  // document holding that end position is pattern-length independent.
  std::vector<std::uint32_t> docs(n + 1);
  docs[0] = 0;
  for (std::uint64_t r = 1; r <= n; ++r) {
    std::uint64_t e = n - 1 - sa[r];
    auto it = std::upper_bound(fm.doc_starts_.begin(), fm.doc_starts_.end(), e);
    docs[r] = static_cast<std::uint32_t>((it - fm.doc_starts_.begin()) - 1);
  }

  fm.sampled_rows_ = BitVector(n + 1);
  for (std::uint64_t r = 0; r <= n; ++r) {
    if (sa[r] % sample_rate == 0) {
      fm.sampled_rows_.set(r);
      fm.samples_.push_back(sa[r]);
    }
  }
  fm.sampled_rows_.finish();

  sa.clear();
  sa.shrink_to_fit();
  x.clear();
  x.shrink_to_fit();

  fm.bwt_ = WaveletTree::build(bwt, fm.sigma_);
  bwt.clear();
  bwt.shrink_to_fit();
  fm.doc_ = WaveletTree::build(docs, fm.num_docs_);

  CLUEDEX_LOG_INFO("indexed %llu stream tokens across %u documents",
                   static_cast<unsigned long long>(n), fm.num_docs_);
  return fm;
}

SearchState FmIndex::extend(const SearchState& s, TokenId token) const {
  if (s.absent()) return SearchState{s.lo, s.lo, s.len + 1};
  std::uint32_t sym = token + 1;
  if (sym >= sigma_) return SearchState{0, 0, s.len + 1};
  std::uint64_t lo = c_[sym] + bwt_.rank(sym, s.lo);
  std::uint64_t hi = c_[sym] + bwt_.rank(sym, s.hi);
  return SearchState{lo, hi, s.len + 1};
}

SearchState FmIndex::find(std::span<const TokenId> pattern) const {
  SearchState s = root();
  for (TokenId t : pattern) s = extend(s, t);
  return s;
}

void FmIndex::get_next(const SearchState& s, std::vector<Extension>& out) const {
  out.clear();
  if (s.absent()) return;
  bwt_.range_distinct(s.lo, s.hi,
                      [&](std::uint32_t sym, std::uint64_t rank_lo, std::uint64_t rank_hi) {
                        if (sym <= kSepToken + 1) return;  // sentinel and separator
                        out.push_back(Extension{
                            sym - 1,
                            SearchState{c_[sym] + rank_lo, c_[sym] + rank_hi, s.len + 1}});
                      });
}

Validity FmIndex::valid_distinct(const SearchState& s) const {
  std::uint64_t lo = std::max<std::uint64_t>(s.lo, 1);  // row 0 is the sentinel suffix
  if (lo >= s.hi) return Validity::kAbsent;
  std::uint64_t d = doc_.distinct_count(lo, s.hi, 2);
  if (d == 0) return Validity::kAbsent;
  return d == 1 ? Validity::kUnique : Validity::kAmbiguous;
}

std::uint32_t FmIndex::lookup_doc(const SearchState& s) const {
  switch (valid_distinct(s)) {
    case Validity::kAbsent:
      throw_error(ErrorCode::kAbsent, "pattern does not occur in the corpus");
    case Validity::kAmbiguous:
      throw_error(ErrorCode::kAmbiguous, "pattern occurs in more than one document");
    case Validity::kUnique:
      break;
  }
  return doc_.any_symbol(std::max<std::uint64_t>(s.lo, 1), s.hi);
}

std::vector<Occurrence> FmIndex::locate(const SearchState& s, std::uint64_t max_results) const {
  if (s.len == 0) throw_error(ErrorCode::kInvalidArgument, "cannot locate the empty pattern");
  std::vector<Occurrence> out;
  if (s.absent()) return out;
  std::uint64_t lo = std::max<std::uint64_t>(s.lo, 1);
  for (std::uint64_t r = lo; r < s.hi && out.size() < max_results; ++r) {
    std::uint64_t i = suffix_position(r);
    std::uint64_t end = n_ - 1 - i;
    std::uint64_t start = end + 1 - s.len;
    auto it = std::upper_bound(doc_starts_.begin(), doc_starts_.end(), start);
    std::uint32_t d = static_cast<std::uint32_t>((it - doc_starts_.begin()) - 1);
    out.push_back(Occurrence{d, start - doc_starts_[d]});
  }
  return out;
}

std::uint64_t FmIndex::lf(std::uint64_t row) const {
  std::uint32_t sym = bwt_.access(row);
  return c_[sym] + bwt_.rank(sym, row);
}

std::uint64_t FmIndex::suffix_position(std::uint64_t row) const {
  std::uint64_t steps = 0;
  while (!sampled_rows_.get(row)) {
    row = lf(row);
    ++steps;
  }
  return samples_[sampled_rows_.rank1(row)] + steps;
}

void FmIndex::save_sections(ContainerWriter& w) const {
  BinaryWriter meta;
  meta.u64(n_);
  meta.u32(sigma_);
  meta.u32(num_docs_);
  meta.u32(sample_rate_);
  w.add_section("fmmeta", std::move(meta));

  BinaryWriter c;
  c.vec(c_);
  w.add_section("fmc", std::move(c));

  BinaryWriter bwt;
  bwt_.save(bwt);
  w.add_section("fmbwt", std::move(bwt));

  BinaryWriter doc;
  doc_.save(doc);
  w.add_section("fmdoc", std::move(doc));

  BinaryWriter samp;
  sampled_rows_.save(samp);
  samp.vec(samples_);
  w.add_section("fmsamp", std::move(samp));

  BinaryWriter starts;
  starts.vec(doc_starts_);
  w.add_section("fmdocs", std::move(starts));
}

FmIndex FmIndex::load_sections(const ContainerReader& r) {
  FmIndex fm;
  BinaryReader meta = r.section("fmmeta");
  fm.n_ = meta.u64();
  fm.sigma_ = meta.u32();
  fm.num_docs_ = meta.u32();
  fm.sample_rate_ = meta.u32();

  BinaryReader c = r.section("fmc");
  fm.c_ = c.vec<std::uint64_t>();

  BinaryReader bwt = r.section("fmbwt");
  fm.bwt_ = WaveletTree::load(bwt);

  BinaryReader doc = r.section("fmdoc");
  fm.doc_ = WaveletTree::load(doc);

  BinaryReader samp = r.section("fmsamp");
  fm.sampled_rows_ = BitVector::load(samp);
  fm.samples_ = samp.vec<std::uint64_t>();

  BinaryReader starts = r.section("fmdocs");
  fm.doc_starts_ = starts.vec<std::uint64_t>();
  return fm;
}

}  // namespace cluedex
