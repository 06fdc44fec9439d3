#include "img2uml/errors.hpp"
#include "img2uml/pipeline.hpp"

namespace img2uml {

namespace {

constexpr std::string_view kPrompt1 =
    "Can you turn this hand-drawn UML class diagram into the corresponding class diagram in PlantUML notation?";

constexpr std::string_view kPrompt2 =
    "Given the hand-drawn UML class diagram provided, can you accurately convert it into PlantUML notation, "
    "ensuring fidelity to the original structure and relationships between classes? Please pay close attention to "
    "attributes, methods, and their respective visibilities.";

constexpr std::string_view kPrompt3 =
    "Given the hand-drawn UML class diagram provided, can you faithfully translate it into PlantUML notation, "
    "preserving all class relationships, including associations, aggregations, and generalizations? Ensure that "
    "attributes, methods, and their respective access modifiers are accurately represented. Additionally, please "
    "accurately replicate the existing cardinalities and multiplicities without altering them. Please provide a "
    "clear and coherent conversion, maintaining the integrity of the original diagram.";

constexpr std::string_view kCheatSheet = R"(@startuml
class Animal {
  +name : String
  -age : int
  #eat(food : Food, amount : int) : void
}
abstract class Shape
interface Drawable {
  +draw()
}
enum Color {
  RED
  GREEN
}
class Fish extends Animal
Animal <|-- Dog
Drawable <|.. Circle
Zoo "1" o-- "0..*" Animal : houses >
Car "1" *-- "4" Wheel
Order --> Customer : placed by
Client ..> Service
@enduml)";

}  // namespace

PromptTemplate builtin_prompt(int number) {
  switch (number) {
    case 1: return {"1", std::string(kPrompt1), false};
    case 2: return {"2", std::string(kPrompt2), false};
    case 3: return {"3", std::string(kPrompt3), false};
    default: throw UsageError("no built-in prompt " + std::to_string(number) + " (expected 1, 2 or 3)");
  }
}

std::string render_prompt(const PromptTemplate& prompt) {
  if (!prompt.ignore_semantics) {
    return prompt.text;
  }
  return prompt.text + " " + std::string(kIgnoreSemanticsSentence);
}

std::string repair_message(const std::vector<Diagnostic>& diagnostics) {
  std::string out = "The PlantUML code you returned does not compile:\n";
  for (const auto& d : diagnostics) {
    out += "- " + format_diagnostic(d) + "\n";
  }
  out +=
      "\nPlease return the corrected class diagram as one complete PlantUML code block. "
      "Declare classes with `class Name { ... }` (not `Name{ }` on its own) and put each relationship on its own "
      "line outside class bodies. The accepted syntax looks like this:\n\n";
  out += kCheatSheet;
  out += "\n";
  return out;
}

}  // namespace img2uml
