#ifndef OSTTA_EMB1_HPP
#define OSTTA_EMB1_HPP

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ostta/prototypes.hpp"
#include "ostta/stream.hpp"

namespace ostta {

// EMB1 binary dump, little-endian:
//   magic "EMB1" | u32 dim | u32 num_classes | num_classes*dim f32 prototypes
//   | u32 num_samples | per sample: dim f32 raw, dim f32 raw_aug,
//     i32 gt_class (-1 = undesired), u16 domain_id, 2 zero pad bytes.
// Values are stored at f32; loading widens to f64 without renormalizing, so
// a dump round-trips bit-for-bit.

std::string encode_embedding_dump(const ClassPrototypeSet& prototypes,
                                  std::span<const StreamSample> samples);

std::pair<ClassPrototypeSet, std::vector<StreamSample>>
decode_embedding_dump(const std::string& bytes);

void write_embedding_dump(const std::string& path, const ClassPrototypeSet& prototypes,
                          std::span<const StreamSample> samples);

std::pair<ClassPrototypeSet, std::vector<StreamSample>>
load_embedding_dump(const std::string& path);

}  // namespace ostta

#endif  // OSTTA_EMB1_HPP
