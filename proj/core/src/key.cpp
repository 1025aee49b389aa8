#include "flexstate/key.hpp"

#include <charconv>
#include <vector>

#include "flexstate/error.hpp"

namespace flexstate {

namespace {

void require_token(std::string_view what, std::string_view token) {
  if (!is_valid_token(token)) {
    throw Error(Errc::InvalidToken, std::string(what) + " '" + std::string(token.substr(0, 64)) + "'");
  }
}

}  // namespace

std::string StoreKey::partition() const {
  std::string out;
  out.reserve(nf_id.size() + instance_id.size() + 12);
  out.append(nf_id).push_back(kKeySeparator);
  out.append(instance_id).push_back(kKeySeparator);
  out.append(std::to_string(core_id));
  return out;
}

std::string StoreKey::render() const {
  std::string out = partition();
  out.push_back(kKeySeparator);
  out.append(type_token(type));
  out.push_back(kKeySeparator);
  out.append(structure_id);
  return out;
}

StoreKey build_key(std::string_view nf_id, std::string_view instance_id, std::uint32_t core_id,
                   StructureType type, std::string_view structure_id) {
  require_token("nf id", nf_id);
  require_token("instance id", instance_id);
  check_structure_id(structure_id);
  return StoreKey{std::string(nf_id), std::string(instance_id), core_id, type,
                  std::string(structure_id)};
}

StoreKey parse_key(std::string_view rendered) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = rendered.find(kKeySeparator, start);
    if (pos == std::string_view::npos) {
      parts.push_back(rendered.substr(start));
      break;
    }
    parts.push_back(rendered.substr(start, pos - start));
    start = pos + 1;
  }
  if (parts.size() != 5) {
    throw Error(Errc::InvalidToken, "expected 5 '@'-separated fields in '" + std::string(rendered) + "'");
  }

  std::uint32_t core = 0;
  auto core_str = parts[2];
  // canonical decimal only: no sign, no leading zeros
  bool canonical = !core_str.empty() && (core_str.size() == 1 || core_str.front() != '0');
  auto [ptr, ec] = std::from_chars(core_str.data(), core_str.data() + core_str.size(), core);
  if (!canonical || ec != std::errc{} || ptr != core_str.data() + core_str.size()) {
    throw Error(Errc::InvalidToken, "core id '" + std::string(core_str) + "'");
  }
  auto type = parse_type_token(parts[3]);
  if (!type) throw Error(Errc::InvalidToken, "structure type '" + std::string(parts[3]) + "'");
  try {
    return build_key(parts[0], parts[1], core, *type, parts[4]);
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidId) throw Error(Errc::InvalidToken, e.what());
    throw;
  }
}

std::string instance_prefix(std::string_view nf_id, std::string_view instance_id) {
  require_token("nf id", nf_id);
  require_token("instance id", instance_id);
  std::string out(nf_id);
  out.push_back(kKeySeparator);
  out.append(instance_id);
  out.push_back(kKeySeparator);
  return out;
}

}  // namespace flexstate
