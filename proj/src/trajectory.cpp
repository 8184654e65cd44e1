#include "pendubridge/trajectory.hpp"

#include <array>
#include <utility>

namespace pendubridge {
namespace {

constexpr std::array<std::pair<RunStatus, std::string_view>, 5> kNames{{
    {RunStatus::completed, "completed"},
    {RunStatus::fell, "fell"},
    {RunStatus::diverged, "diverged"},
    {RunStatus::aborted, "aborted"},
    {RunStatus::off_track, "off_track"},
}};

}  // namespace

std::string_view to_string(RunStatus status) {
  for (const auto& [s, name] : kNames) {
    if (s == status) return name;
  }
  return "unknown";
}

std::optional<RunStatus> parse_status(std::string_view text) {
  for (const auto& [s, name] : kNames) {
    if (name == text) return s;
  }
  return std::nullopt;
}

}  // namespace pendubridge
