#pragma once

#include <string>
#include <vector>

#include "sparsegen/embedding.hpp"

namespace sparsegen {

// EMB1 container: magic "EMB1", u32 LE record count, then per record
//   u32 LE id length, id bytes (UTF-8),
//   u32 LE n_dim, u32 LE m_tokens,
//   n_dim*m_tokens float32 LE, column-major,
//   m_tokens float32 LE attention weights.
// The encoding is bit-exact: floats round-trip by bit pattern.

void write_emb1(const std::string& path, const std::vector<TokenizedEmbedding>& records);
std::vector<TokenizedEmbedding> read_emb1(const std::string& path);

// In-memory codec, used by the file backend and by tests.
std::string emb1_encode(const std::vector<TokenizedEmbedding>& records);
std::vector<TokenizedEmbedding> emb1_decode(const std::string& bytes);

}  // namespace sparsegen
