#pragma once

#include "kgmas/term.hpp"

// Fixed kgmas: vocabulary for setup and data graphs.
namespace kgmas::vocabulary {

// Asset layer
inline Term hasAssetKind() { return vocab("hasAssetKind"); }
inline Term hasRealm() { return vocab("hasRealm"); }
inline Term physical() { return vocab("physical"); }
inline Term digital() { return vocab("digital"); }
// Communication layer
inline Term hasProtocol() { return vocab("hasProtocol"); }
inline Term hasEndpoint() { return vocab("hasEndpoint"); }
// Information layer; channels are nodes carrying a topic and message kind.
inline Term publishesOn() { return vocab("publishesOn"); }
inline Term subscribesTo() { return vocab("subscribesTo"); }
inline Term hasTopic() { return vocab("hasTopic"); }
inline Term hasMessageKind() { return vocab("hasMessageKind"); }
// Functional layer
inline Term hasCapability() { return vocab("hasCapability"); }
// System layer
inline Term aggregates() { return vocab("aggregates"); }
inline Term hasCoordinationRole() { return vocab("hasCoordinationRole"); }

// Protocol encoding
inline Term rdfType() { return iri(std::string(kRdfNamespace) + "type"); }
inline Term Protocol() { return vocab("Protocol"); }
inline Term forTask() { return vocab("forTask"); }
inline Term hasStep() { return vocab("hasStep"); }
inline Term stepIndex() { return vocab("stepIndex"); }
inline Term stepRole() { return vocab("stepRole"); }
inline Term actionKind() { return vocab("actionKind"); }
inline Term targetRole() { return vocab("targetRole"); }
inline Term contentTemplate() { return vocab("contentTemplate"); }
inline Term requiresCapability() { return vocab("requiresCapability"); }
inline Term bindsRole() { return vocab("bindsRole"); }
/// Reserved role executed by the KG-agent.
inline Term kgRole() { return vocab("kg"); }

// Data graph
inline Term hasStatus() { return vocab("hasStatus"); }
inline Term atPosition() { return vocab("atPosition"); }
inline Term hasJointStates() { return vocab("hasJointStates"); }
inline Term hasGripper() { return vocab("hasGripper"); }
inline Term heldBy() { return vocab("heldBy"); }
inline Term ofTask() { return vocab("ofTask"); }
inline Term atStep() { return vocab("atStep"); }
inline Term eventName() { return vocab("eventName"); }
inline Term eventContent() { return vocab("eventContent"); }
inline Term logicalTime() { return vocab("logicalTime"); }
inline Term currentStep() { return vocab("currentStep"); }
inline Term taskStatus() { return vocab("taskStatus"); }
inline Term forProtocol() { return vocab("forProtocol"); }

inline Iri setup_graph() { return {"http://kgmas.example/graph/setup"}; }
inline Iri data_graph() { return {"http://kgmas.example/graph/data"}; }

}  // namespace kgmas::vocabulary
