#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "histad/detector.hpp"
#include "histad/gan.hpp"

namespace histad::io {

// Versioned little-endian binary artifacts. "HADC" holds a checkpoint store
// (config + snapshots), "HADT" a trained detector (config + weights + loss
// trace). Doubles are stored as raw IEEE-754 bits, so write -> read -> write
// is byte-exact.

std::vector<std::uint8_t> encode_store(const gan::CheckpointStore& store);
gan::CheckpointStore decode_store(const std::vector<std::uint8_t>& bytes);
void save_store(const gan::CheckpointStore& store, const std::string& path);
gan::CheckpointStore load_store(const std::string& path);

std::vector<std::uint8_t> encode_detector(const dtv::Detector& det);
dtv::Detector decode_detector(const std::vector<std::uint8_t>& bytes);
void save_detector(const dtv::Detector& det, const std::string& path);
dtv::Detector load_detector(const std::string& path);

std::vector<std::uint8_t> read_bytes(const std::string& path);
void write_bytes(const std::vector<std::uint8_t>& bytes, const std::string& path);

}  // namespace histad::io
