#pragma once

#include <filesystem>

#include "saug/encoders.hpp"
#include "saug/nn.hpp"
#include "saug/pseudo_gen.hpp"

namespace saug {

/// Versioned JSON checkpoints: layer specs plus flat parameter arrays.
/// Doubles are written with shortest round-trip formatting, so save/load is
/// value-exact.
void save_model(const GnnModel& model, const std::filesystem::path& file);
GnnModel load_model(const std::filesystem::path& file);

void save_generator(const Generator& gen, const std::filesystem::path& file);
Generator load_generator(const std::filesystem::path& file);

void save_embeddings(const EmbeddingPair& emb, const std::filesystem::path& file);
EmbeddingPair load_embeddings(const std::filesystem::path& file);

}  // namespace saug
