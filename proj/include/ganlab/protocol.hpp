#pragma once

// JSON wire format. Every message is one object {"kind": ..., "payload": ...}
// (server -> client: snapshot | error | ack) or
// {"kind": "command", "name": ..., "args": {...}} (client -> server).
//
// Doubles are written at round-trip precision. Non-finite values, which JSON
// cannot carry, are written as the strings "inf", "-inf" and "nan".

#include "ganlab/session.hpp"
#include "ganlab/snapshot.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace ganlab::protocol {

std::string encode_frame(const Frame& frame);
// Throws DecodeError on malformed or truncated input.
Frame decode_frame(std::string_view text);

std::string encode_command(const SessionCommand& command);
// Throws DecodeError on malformed input and ConfigError on invalid values
// (unknown distribution, too few drawn points, ...).
SessionCommand decode_command(std::string_view text);

nlohmann::json snapshot_to_json(const TrainingSnapshot& snapshot);
TrainingSnapshot snapshot_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const GanConfig& config);
GanConfig config_from_json(const nlohmann::json& j);

// Pretty-printed snapshot document, as written by the headless runner.
std::string snapshot_document(const TrainingSnapshot& snapshot);

} // namespace ganlab::protocol
