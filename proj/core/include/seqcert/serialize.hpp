#pragma once

#include <string>

#include "seqcert/network.hpp"

namespace seqcert {

// Loads a model from a JSON manifest plus its raw float32 weight blob.
// The manifest "weights" path is resolved relative to the manifest's
// directory; an optional "weights_crc32" field is checked against the blob.
// The returned network is validated and shape-inferred.
Network load_model(const std::string& manifest_path);

// Writes manifest + weight blob for a programmatically built network.
// Tensors attached to nodes are packed into the blob in deterministic
// (node, key) order and replaced by {offset, dims} references.
void save_model(const Network& net, const std::string& manifest_path,
                const std::string& weights_path);

}  // namespace seqcert
