#pragma once

#include <stdexcept>
#include <string>

namespace homeassist {

// Invalid task definitions, session configs, or config files.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class GoalSamplingFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CommunicationBackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendUnavailable : public CommunicationBackendError {
 public:
  using CommunicationBackendError::CommunicationBackendError;
};

class BackendProtocolError : public CommunicationBackendError {
 public:
  using CommunicationBackendError::CommunicationBackendError;
};

// A user reply confirmed something the agent had already been told was wrong.
class ContradictionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MemoryFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace homeassist
