#pragma once

#include <random>
#include <vector>

#include "titlepress/config.hpp"
#include "titlepress/dataset.hpp"
#include "titlepress/nn/graph.hpp"

namespace titlepress::model {

// Parameter names used by the embedding layer.
inline constexpr const char* kWordTable = "embed.word_table";
inline constexpr const char* kCharTable = "embed.char_table";
inline constexpr const char* kConvW = "embed.conv.w";
inline constexpr const char* kConvB = "embed.conv.b";
std::string highway_param(int layer, const char* part);  // part in {tw,tb,gw,gb}

/// Creates the embedding parameters. The word table starts at zero and is
/// always frozen; install pre-trained vectors with set_word_table.
/// Char table and highway weights use uniform(-0.05, 0.05); the conv
/// filters use Xavier normal.
void create_embedder_params(nn::ParamStore& store, const ModelConfig& config,
                            int word_vocab, int char_vocab, std::mt19937_64& rng);

/// Installs fixed word vectors. Rows for PAD stay zero; the UNK row is set
/// to the mean of the provided rows when `unk_to_mean` is true.
void set_word_table(nn::ParamStore& store, const nn::Mat& vectors, bool unk_to_mean);

nn::Node* word_embed(nn::Graph& g, nn::ParamStore& store, const std::vector<int>& word_ids);

nn::Node* char_cnn_embed(nn::Graph& g, nn::ParamStore& store, const ModelConfig& config,
                         const std::vector<std::vector<int>>& char_ids);

/// Stacked highway layers over the row dimension of x (N x d).
nn::Node* highway_combine(nn::Graph& g, nn::ParamStore& store, const ModelConfig& config,
                          nn::Node* x);

/// Full embedding path: char-CNN (if enabled) + word lookup + highway.
nn::Node* embed_sequence(nn::Graph& g, nn::ParamStore& store, const ModelConfig& config,
                         const EncodedExample& ex);

/// Loads "word v1 ... vD" text-format vectors into an id-indexed table.
/// Words absent from the file keep zero rows until set_word_table maps
/// UNK to the mean of present vectors.
nn::Mat load_word_vectors(const std::string& path, const Vocabulary& vocab, int e_word);

}  // namespace titlepress::model
