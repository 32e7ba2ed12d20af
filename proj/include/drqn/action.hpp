#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace drqn {

// Numeric codes match the trading convention: buy 1, wait-and-see 0, sell -1.
enum class Action : std::int8_t { Sell = -1, Hold = 0, Buy = 1 };

// Network output rows, in order.
inline constexpr std::array<Action, 3> kActionOrder = {Action::Buy, Action::Hold, Action::Sell};

constexpr int action_code(Action a) { return static_cast<int>(a); }

constexpr std::size_t action_index(Action a) {
  switch (a) {
    case Action::Buy: return 0;
    case Action::Hold: return 1;
    case Action::Sell: return 2;
  }
  return 1;
}

constexpr std::string_view action_name(Action a) {
  switch (a) {
    case Action::Buy: return "buy";
    case Action::Hold: return "hold";
    case Action::Sell: return "sell";
  }
  return "hold";
}

constexpr std::optional<Action> action_from_code(int code) {
  if (code == 1) return Action::Buy;
  if (code == 0) return Action::Hold;
  if (code == -1) return Action::Sell;
  return std::nullopt;
}

}  // namespace drqn
