#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "invplan/types.hpp"

/// @file
/// The prompt registry: one fixed template per generative judgment the
/// engine can request. Slot holes use {name} syntax; render() fills them.

namespace invplan {

enum class PromptKind {
  IdentifyMainAgent,
  IdentifyAllAgents,
  IdentifyInferredVariable,
  ExtractExtraInfo,
  ExtractActionsOfAgent,
  DetectAction,
  DetectBelief,
  DetectGoal,
  DetectObservation,
  DetectState,
  DetectHigherOrder,
  SampleBelief,
  SampleGoal,
  SampleObservation,
  ProposeInitialModel,
  LikelihoodObsGivenState,
  LikelihoodActionGivenGoalBeliefBeliefOfGoal,
  LikelihoodActionGivenSocialGoalBelief,
  LikelihoodActionGivenGoalBelief,
  LikelihoodBestActionAmongChoices,
  LikelihoodInitialBelief,
  LikelihoodBeliefGivenObsPrevBelief,
  LikelihoodBeliefGivenStatePrevBelief,
  LikelihoodUtterance,
};

/// What role a template plays; likelihood templates feed judge(), the rest
/// feed propose().
enum class PromptRole { Extraction, Sampling, Likelihood, ModelProposal };

struct PromptTemplate {
  PromptKind kind;
  const char* id;
  PromptRole role;
  const char* text;
};

namespace prompt_text {

inline constexpr const char* kIdentifyMainAgent =
    "Find the name of the character that we need to infer about in the question "
    "and choices. Only output the name. Do not answer the question.\n\n"
    "Question: {question}\n\nChoices: {choices}\n\nCharacter name:";

inline constexpr const char* kIdentifyAllAgents =
    "Extract the names of all the characters from the story and question. "
    "Provide only the names or roles, without any additional information. Do "
    "not answer the question.\n\nYour response should be a list containing the "
    "names, like [\"name1\", \"name2\"].\n\nStory: {story}\n\nResponse:";

inline constexpr const char* kIdentifyInferredVariable =
    "Choose the variable that best summarizes the information about the "
    "differences that the choices contain. Only output the variable.\n\n"
    "Variables include: {variables}\n\nChoices: {choices}\n\nVariable:";

inline constexpr const char* kExtractExtraInfo =
    "If there is any assumed information in the question given (a conditional "
    "clause starting with specific words like \"if\" is contained), rewrite it "
    "as a declarative sentence. Do not include any questions in the extra "
    "information. Do not make up details for the information. Use the original "
    "wording.\n\nOtherwise, output \"NONE\".\n\nQuestion: {question}\n\n"
    "Extra Information:";

inline constexpr const char* kExtractActionsOfAgent =
    "Extract the actions of {inf_agent} in the story verbatim without changing "
    "any of the original words, pluralizing the words, adding in {inf_agent} or "
    "any other name, replacing any of the words, replacing pronouns with names "
    "or replacing any names with pronouns. Actions of {inf_agent} are defined "
    "as events that will change the world state, e.g., {inf_agent} moving to a "
    "new location is an action but {inf_agent} being at a location is not an "
    "action. If {inf_agent} says something, the whole sentence (with "
    "\"replied\", \"said\") is seen as an action.\n\n"
    "Do not change the names of any of the agents, if there is not a name and "
    "only a pronoun then just leave the pronoun. There can be more than one "
    "agent or more than just the inferred agent.\n\n"
    "If there are multiple actions in a sentence then they should be extracted "
    "as one single action, without changing any of the original words, such as "
    "pluralizing the words, replacing any of the words, replacing pronouns with "
    "names, or replacing any names with pronouns, and do not add any words.\n\n"
    "Do not insert actions, pronouns, or other words that are not explicitly "
    "stated in the text. Do not separate the objects in the same action.\n\n"
    "Do not add any pronouns. Keep the commas, if any.\n\n"
    "Only actions that have already occurred at the time can be considered "
    "clearly stated. Again, only extract actions performed by {inf_agent}.\n\n"
    "The output format should be: [\"aaa.\", \"bbb.\", ...]. Output only this "
    "list.\n\nStory: {story}\n\nExtraction:";

// The detect-* templates share the A/B-with-evidence response contract.
inline constexpr const char* kDetectAction =
    "Determine if {character}'s action(s) is clearly stated in the story.\n\n"
    "The action(s) cannot be the character's inner thoughts.\n\n"
    "Only actions of {character} that have already occurred, or are currently "
    "taking place can be considered clearly stated.\n\n"
    "If it's more like {character}'s desire or goal, it does not count as an "
    "action. {character}'s utterance is considered as an action (include the "
    "verb like \"said\" or \"replied\" in the evidence sentence, if any). Do "
    "not change any of the original wording.\n\n"
    "Answer in the form of a list. The first element of the list contains the "
    "option A or B. A means clearly stated, and B means not clearly stated.\n\n"
    "If the answer is A, include sentence(s) from the original story that "
    "serves as evidence, and place it in the second element of the list, "
    "without any kind of formatting. Note that there could be multiple action "
    "sentences.\n\nOtherwise, the second element can be an empty string. Do "
    "not write anything else.\n\nExample 1: [\"A\", \"evidence sentence.\"]\n\n"
    "Example 2: [\"B\", \"\"]\n\nStory: {story}\n\nAnswer:";

inline constexpr const char* kDetectBelief =
    "Determine if the belief of {character} is clearly stated in the story.\n\n"
    "Usually, belief is one's understanding of the state of the world or the "
    "state of others. A subjective attitude towards things does not count as "
    "belief. An action or utterance of the agent does not count as a belief. "
    "Words like \"know\" or \"believe\" could be hints for belief.\n\n"
    "Answer in the form of a list. The first element of the list contains the "
    "option A or B. A means clearly stated, and B means not clearly stated.\n\n"
    "If the answer is A, include sentence(s) from the original story that "
    "serves as evidence, and place it in the second element of the list, "
    "without any kind of formatting.\n\nOtherwise, the second element can be "
    "an empty string. Do not write anything else.\n\n"
    "Example 1: [\"A\", \"evidence sentence.\"]\n\nExample 2: [\"B\", \"\"]\n\n"
    "Story: {story}\n\nAnswer:";

inline constexpr const char* kDetectGoal =
    "Determine if the goal of {character} is clearly stated in the story.\n\n"
    "Usually, goals refer to a person's goals or intentions regarding a "
    "particular event. Moreover, a sentence that shows a person has been "
    "trying to do something, or summarizes their efforts of doing something "
    "should always be considered a goal. Helping others to achieve their goals "
    "also counts as a person's goal.\n\n"
    "Answer in the form of a list. The first element of the list contains the "
    "option A or B. A means clearly stated, and B means not clearly stated.\n\n"
    "If the answer is A, include sentence(s) from the original story that "
    "serves as evidence, and place it in the second element of the list, "
    "without any kind of formatting.\n\nOtherwise, the second element can be "
    "an empty string. Do not write anything else.\n\n"
    "Example 1: [\"A\", \"evidence sentence.\"]\n\nExample 2: [\"B\", \"\"]\n\n"
    "Story: {story}\n\nAnswer:";

inline constexpr const char* kDetectObservation =
    "Determine if the observation of {character} is clearly stated in the "
    "story.\n\nObservation refers to the main character's perception of an "
    "event; it is only considered clearly stated when the protagonist's "
    "perception is explicitly mentioned, like if they visually see something, "
    "visually notice something, or hear something, or any other state that can "
    "be perceived by the agent with but not limited to their 5 senses.\n\n"
    "A character's utterance does not mean that their observation is clearly "
    "stated, because they might lie.\n\n"
    "Answer in the form of a list. The first element of the list contains the "
    "option A or B. A means clearly stated, and B means not clearly stated.\n\n"
    "If the answer is A, include sentence(s) from the original story that "
    "serves as evidence, and place it in the second element of the list, "
    "without any kind of formatting.\n\nOtherwise, the second element can be "
    "an empty string. Do not write anything else.\n\n"
    "Example 1: [\"A\", \"evidence sentence.\"]\n\nExample 2: [\"B\", \"\"]\n\n"
    "Story: {story}\n\nAnswer:";

inline constexpr const char* kDetectState =
    "Determine if the story contains the objective state(s) of an object or an "
    "event.\n\nState refers to the physical condition of something or the "
    "state of the world.\n\nNo actions of agents should be involved in the "
    "state but it can be the result of an action of an agent. For example, "
    "\"A entered B\" is not a state, while \"A is in B\" is a state.\n\n"
    "An objective state statement should not include personal perspectives but "
    "should be objective. If a person's perception is involved, it is no "
    "longer considered an objective state.\n\n"
    "Answer in the form of a list. The first element of the list contains the "
    "option A or B. A means clearly stated, and B means not clearly stated.\n\n"
    "If the answer is A, include sentence(s) from the original story that "
    "serves as evidence, and place it in the second element of the list, "
    "without any kind of formatting.\n\nIf there are multiple sentences, "
    "include them all in the second element of the list.\n\nOtherwise, the "
    "second element can be an empty string. Do not write anything else.\n\n"
    "Example 1: [\"A\", \"evidence sentence(s).\"]\n\nExample 2: [\"B\", \"\"]\n\n"
    "Story: {story}\n\nAnswer:";

inline constexpr const char* kDetectHigherOrder =
    "Determine whether the question is about a higher-order belief.\n\n"
    "A higher-order belief refers to a belief about another person's belief, "
    "goal, or action.\n\nIt is not a high-order belief if it only asks about "
    "one agent's belief.\n\nPlease respond with \"Yes\" or \"No\".\n\n"
    "If the answer is \"Yes\", the question often ends with \"Where does A "
    "think that B ...?\" Otherwise, respond \"No\".\n\n"
    "Question: [A story involving several people.] Where will Jack look for "
    "the celery?\n\nHigher-order belief: No\n\n"
    "Question: [A story involving several people.] Where does Jack think that "
    "Chloe searches for the hat?\n\nHigher-order belief: Yes\n\n"
    "Question: {question}\n\nHigher-order belief:";

inline constexpr const char* kSampleBelief =
    "Propose {num} hypotheses for the belief of {character} in the story.\n"
    "Usually, belief is one's view or perspective on a state, and it "
    "represents an understanding of the physical state of the world.\n"
    "Do not state any reason for the hypotheses. Do not contain any form of "
    "explanation in the hypotheses.\n"
    "Output a list of hypotheses of length {num} in following form: "
    "[\"aaa.\", \"bbb.\", ...]\n\n"
    "Given information: {information}\n"
    "Ensure that the hypotheses align with the given information perfectly. "
    "The hypotheses could be like \"{character} believes that A is in B\".\n"
    "First, list out all entities in the given information. Then, formulate "
    "hypotheses using all entities. Make sure the hypotheses starts with "
    "{character}.\nOutput the hypotheses in the following form: [\"aaa.\"]\n"
    "Observation Hypotheses: []\n\nBelief Hypotheses:";

inline constexpr const char* kSampleGoal =
    "Propose {num} hypotheses for the goal of {character}.\n\n"
    "The goal refers to {character}'s intentions.\n\n"
    "Do not provide any explanation for the hypotheses. Do not propose any "
    "sentence that's not depicting the goal, like the action or belief of "
    "{character}.\n\nThe wording for hypotheses cannot be speculative.\n\n"
    "The proposed goal does not have to be too specific, e.g., Andy wants to "
    "help others; Andy wants to hinder others; Andy is indifferent towards "
    "other's goals, etc.\n\nGiven information: {information}\n\n"
    "Ensure that the hypotheses align with the given information perfectly. It "
    "means that the proposed {character}'s goal matches what's contained in "
    "the information.\n\nOutput the hypotheses in the following form: "
    "[\"aaa.\"]\n\nGoal Hypotheses: []";

inline constexpr const char* kSampleObservation =
    "Propose {num} hypotheses for {character}'s observation of the world.\n\n"
    "The observation refers to {character}'s current perception of events or "
    "the world state. It is only considered clearly stated when {character}'s "
    "perception is explicitly mentioned, like if {character} sees something or "
    "perceives something through other senses. Do not be speculative.\n\n"
    "Do not provide any explanation for the hypotheses. Do not propose any "
    "sentence that's not depicting the observation, like the action or belief "
    "of {character}.\n\nThe wording for hypotheses cannot be speculative.\n\n"
    "If the information contains \"not\", make sure the verb for perception "
    "(e.g., \"see\", \"perceives\") goes before \"not\" in the hypotheses. "
    "e.g., use 'sees that A is not in B' instead of 'does not see that A is in "
    "B'.\nOtherwise, do not include \"not\" in your hypotheses, and make sure "
    "the verb for perception goes first, e.g., 'sees that A is in B'.\n\n"
    "Given information: {information}\n\n"
    "Ensure that the hypotheses align with the given information perfectly. It "
    "means that when the person has the observation the person will act "
    "according to the given information.\n\n"
    "First, list all entities in the given information. Then, formulate "
    "hypotheses using all entities. Make sure the hypothesis starts with "
    "{character}.\n\nOutput the hypotheses in the following form: "
    "[\"aaa.\"]\n\nObservation Hypotheses: []";

inline constexpr const char* kProposeInitialModel =
    "What variables are necessary to solve this question? Please provide the "
    "answer without an explanation.\n"
    "Please select from the following: [\"State\", \"Observation\", "
    "\"Belief\", \"Action\", \"Goal\"]\n"
    "State: The true condition of the environment. This should always be "
    "included.\n"
    "Observation: The observed information about the state. Include this when "
    "the agent has partial observations of the state.\n"
    "Belief: The agent's current estimation of the true state is based on the "
    "state or its observation.\n"
    "Action: A move made by the agent, informed by the state or belief. "
    "Include this only when it is directly relevant to answering the "
    "question.\n"
    "Goal: The objective the agent is trying to achieve. Include this only if "
    "\"Action\" is included.\n\n"
    "Question: {example_question}\n\nVariables: {example_answer}\n\n"
    "Question: {question}\n\nVariables:";

inline constexpr const char* kLikelihoodObsGivenState =
    "Determine if the statement is likely, and respond with only either A or "
    "B.\n\nState: {state}\n\n"
    "Here is a statement of {inf_agent}'s current observation. Only evaluate "
    "current observation of {inf_agent} based on the state. Do not imagine "
    "anything else. Think about {inf_agent}'s location. {inf_agent} is quite "
    "likely to observe all objects and events in {inf_agent}'s location, and "
    "is unlikely to observe states in another location. If {inf_agent} does "
    "not appear in the state, {inf_agent} can't observe anything. Note that "
    "the statement has to be precise in wording to be likely. For example, the "
    "treasure chest and container are different in wording and they're "
    "different objects.\n\n"
    "Determine if the following statement is likely: {statement}\n\n"
    "A) Likely.\n\nB) Unlikely.";

inline constexpr const char* kLikelihoodActionGivenGoalBeliefBeliefOfGoal =
    "Determine if the statement is likely, and respond with only either A or "
    "B.\n\n{inf_agent}'s goal: {goal}\n\n{inf_agent}'s belief: {belief}\n\n"
    "{inf_agent}'s belief of other's goal: {belief_of_goal}\n\n"
    "{inf_agent}'s action: {action}\n\n"
    "When {inf_agent} wants to help, {inf_agent} is likely to bring an object "
    "to other's desired location, and unlikely to grab an object away from "
    "other's desired location.\n\n"
    "When {inf_agent} wants to hinder, {inf_agent} is likely to grab an object "
    "away from other's desired location, and unlikely to bring an object to "
    "other's desired location.\n\n"
    "When {inf_agent} doesn't know other's goal, {inf_agent} is likely to act "
    "according to {inf_agent}'s belief.\n\n"
    "If {inf_agent} wants to help and {inf_agent} believes the object is "
    "placed at other's desired location, it's unlikely {inf_agent} will move "
    "the object.\n\n"
    "If {inf_agent}'s goal, {inf_agent}'s belief of goal, and {inf_agent}'s "
    "action do not align in any way, the action is unlikely.\n\n"
    "Determine if {inf_agent}'s action is likely.\n\nA) Likely.\n\nB) Unlikely.";

inline constexpr const char* kLikelihoodActionGivenSocialGoalBelief =
    "Determine if the statement is likely, and respond with only either A or "
    "B. If it's not certain but it's possible, it's likely.\n\n"
    "{inf_agent}'s social goal: {goal}\n\n{inf_agent}'s belief: {belief}\n\n"
    "Here is a statement of {inf_agent}'s action. Think about {inf_agent}'s "
    "goal.\n\n{inf_agent} will perform actions according to {inf_agent}'s "
    "belief, and any action that does not align with the belief is very "
    "unlikely, except when {inf_agent}'s goal is to hinder or to prevent "
    "others. In this case (goal is hindering others) {inf_agent}'s action is "
    "only likely when it's different from {inf_agent}'s belief. If "
    "{inf_agent}'s mental states contain conditions like \"When giving "
    "information\" and the action is not giving information, it's unlikely.\n\n"
    "Determine if the following statement is likely: {action}\n\n"
    "A) Likely.\n\nB) Unlikely.";

inline constexpr const char* kLikelihoodActionGivenGoalBelief =
    "Determine if the statement is likely, and respond with only either A or "
    "B. If it's not certain but it's possible, it's likely.\n\n"
    "{inf_agent}'s social goal: {goal}\n\n{inf_agent}'s belief: {belief}\n\n"
    "Here is a statement of {inf_agent}'s action. The belief stands for "
    "{inf_agent}'s current belief. {inf_agent} is likely to act according to "
    "goal and belief concerning certain objects (the wording for objects must "
    "be same. You should ignore the correlation of different objects. e.g., "
    "plate and apple are two different objects.) Notice that {inf_agent}'s "
    "belief does not represent the goal.\n\n"
    "When belief and goal are irrelevant, and action is driven by goal, it's "
    "likely. When belief and goal are relevant (about exactly the same object) "
    "and they contradict with action, it's unlikely.\n\n"
    "Determine if the following statement is likely: {action}\n\n"
    "A) Likely.\n\nB) Unlikely.";

inline constexpr const char* kLikelihoodBestActionAmongChoices =
    "Determine if the statement is likely, and respond with only either A or "
    "B. If it's not certain but it's possible, it's likely.\n"
    "{inf_agent}'s belief: {belief}\n{inf_agent}'s goal: {goal}\n"
    "If the next immediate actions possible are: {actions}\n"
    "Determine which immediate action is most possible given the information "
    "about {inf_agent}'s goal and belief.\n\n"
    "Determine if the following statement is likely: {action_a} is a better "
    "immediate action than {action_b}.\n\nA) Likely.\n\nB) Unlikely.";

inline constexpr const char* kLikelihoodInitialBelief =
    "Determine if the statement is likely, and respond with only either A or "
    "B. If it's not certain but it's possible, it's considered likely.\n"
    "Here is a statement of the story and {inf_agent}' initial belief.\n"
    "There is an action that causes the state of the main object to change. "
    "Based on {inf_agent}'s observations determine if {inf_agent} perceives "
    "the state of the object change.\n"
    "If it is not clearly stated that {inf_agent} perceives it then we do not "
    "assume that {inf_agent} perceived the change of state.\n"
    "If {inf_agent} perceives this change then it is highly likely that "
    "{inf_agent}'s belief aligns with the change of state of the object.\n"
    "If {inf_agent} does not perceive this change or if it is unknown if "
    "{inf_agent} perceives this change then it is highly likely that "
    "{inf_agent}'s belief does not align with the change of state of the "
    "object.\nStory: {story}\n"
    "Think about the state of the world and others actions. {inf_agent}' "
    "belief can change throughout time through other's actions and what "
    "{inf_agent} can observe. It is also important to think about if "
    "{inf_agent} can observe other's actions. If {inf_agent} can observe the "
    "same then their belief will change and if not then their belief will "
    "remain constant. Use this to determine {inf_agent}'s beliefs.\n\n"
    "Determine if the following statement is likely: {statement}\n\n"
    "A) Likely.\n\nB) Unlikely.";

inline constexpr const char* kLikelihoodBeliefGivenObsPrevBelief =
    "Determine if the statement is likely, respond with only either A or B.\n"
    "{inf_agent}'s previous belief: {previous_belief}\n"
    "{inf_agent}'s observation: {observation}\n"
    "Here is a statement of {inf_agent}'s current belief. If {inf_agent}'s "
    "current belief is not aligned with {inf_agent}'s observation, it is very "
    "unlikely.\n\n"
    "Determine if the following statement is likely: {statement}\n\n"
    "A) Likely.\n\nB) Unlikely.";

inline constexpr const char* kLikelihoodBeliefGivenStatePrevBelief =
    "Determine if the statement is likely, respond with only either A or B.\n"
    "{inf_agent}'s previous belief: {previous_belief}\nState: {state}\n"
    "Here is a statement of {inf_agent}'s current belief. If {inf_agent}'s "
    "current belief is not aligned with the state, it is very unlikely.\n\n"
    "Determine if the following statement is likely: {statement}\n\n"
    "A) Likely.\n\nB) Unlikely.";

inline constexpr const char* kLikelihoodUtterance =
    "Determine if {inf_agent}'s utterance is likely, and respond with only "
    "either A or B.\n{inf_agent}'s belief: {belief}\n"
    "{inf_agent}'s goal: {goal}\n{inf_agent}'s utterance: {utterance}\n"
    "When {inf_agent}'s goal is to help others, {inf_agent}'s utterance is "
    "likely when it strictly reflects {inf_agent}'s belief, and unlikely if it "
    "does not reflect {inf_agent}'s belief.\n"
    "When {inf_agent}'s goal is to hinder or to prevent others from achieving "
    "their goals, {inf_agent}'s utterance is likely when it's different from "
    "{inf_agent}'s belief, and unlikely if it reflects {inf_agent}'s belief.\n\n"
    "Determine if {inf_agent}'s utterance is likely.\n\nA) Likely.\n\nB) Unlikely.";

}  // namespace prompt_text

inline const std::array<PromptTemplate, 24>& prompt_registry() {
  static const std::array<PromptTemplate, 24> kRegistry = {{
      {PromptKind::IdentifyMainAgent, "identify-main-agent",
       PromptRole::Extraction, prompt_text::kIdentifyMainAgent},
      {PromptKind::IdentifyAllAgents, "identify-all-agents",
       PromptRole::Extraction, prompt_text::kIdentifyAllAgents},
      {PromptKind::IdentifyInferredVariable, "identify-inferred-variable",
       PromptRole::Extraction, prompt_text::kIdentifyInferredVariable},
      {PromptKind::ExtractExtraInfo, "extract-extra-info",
       PromptRole::Extraction, prompt_text::kExtractExtraInfo},
      {PromptKind::ExtractActionsOfAgent, "extract-actions-of-agent",
       PromptRole::Extraction, prompt_text::kExtractActionsOfAgent},
      {PromptKind::DetectAction, "detect-action", PromptRole::Extraction,
       prompt_text::kDetectAction},
      {PromptKind::DetectBelief, "detect-belief", PromptRole::Extraction,
       prompt_text::kDetectBelief},
      {PromptKind::DetectGoal, "detect-goal", PromptRole::Extraction,
       prompt_text::kDetectGoal},
      {PromptKind::DetectObservation, "detect-observation",
       PromptRole::Extraction, prompt_text::kDetectObservation},
      {PromptKind::DetectState, "detect-state", PromptRole::Extraction,
       prompt_text::kDetectState},
      {PromptKind::DetectHigherOrder, "detect-higher-order",
       PromptRole::Extraction, prompt_text::kDetectHigherOrder},
      {PromptKind::SampleBelief, "sample-belief", PromptRole::Sampling,
       prompt_text::kSampleBelief},
      {PromptKind::SampleGoal, "sample-goal", PromptRole::Sampling,
       prompt_text::kSampleGoal},
      {PromptKind::SampleObservation, "sample-observation", PromptRole::Sampling,
       prompt_text::kSampleObservation},
      {PromptKind::ProposeInitialModel, "propose-initial-model",
       PromptRole::ModelProposal, prompt_text::kProposeInitialModel},
      {PromptKind::LikelihoodObsGivenState, "likelihood-obs-given-state",
       PromptRole::Likelihood, prompt_text::kLikelihoodObsGivenState},
      {PromptKind::LikelihoodActionGivenGoalBeliefBeliefOfGoal,
       "likelihood-action-given-goal-belief-beliefofgoal", PromptRole::Likelihood,
       prompt_text::kLikelihoodActionGivenGoalBeliefBeliefOfGoal},
      {PromptKind::LikelihoodActionGivenSocialGoalBelief,
       "likelihood-action-given-socialgoal-belief", PromptRole::Likelihood,
       prompt_text::kLikelihoodActionGivenSocialGoalBelief},
      {PromptKind::LikelihoodActionGivenGoalBelief,
       "likelihood-action-given-goal-belief", PromptRole::Likelihood,
       prompt_text::kLikelihoodActionGivenGoalBelief},
      {PromptKind::LikelihoodBestActionAmongChoices,
       "likelihood-best-action-among-choices", PromptRole::Likelihood,
       prompt_text::kLikelihoodBestActionAmongChoices},
      {PromptKind::LikelihoodInitialBelief, "likelihood-initial-belief",
       PromptRole::Likelihood, prompt_text::kLikelihoodInitialBelief},
      {PromptKind::LikelihoodBeliefGivenObsPrevBelief,
       "likelihood-belief-given-obs-prevbelief", PromptRole::Likelihood,
       prompt_text::kLikelihoodBeliefGivenObsPrevBelief},
      {PromptKind::LikelihoodBeliefGivenStatePrevBelief,
       "likelihood-belief-given-state-prevbelief", PromptRole::Likelihood,
       prompt_text::kLikelihoodBeliefGivenStatePrevBelief},
      {PromptKind::LikelihoodUtterance, "likelihood-utterance",
       PromptRole::Likelihood, prompt_text::kLikelihoodUtterance},
  }};
  return kRegistry;
}

inline const PromptTemplate& template_for(PromptKind kind) {
  for (const PromptTemplate& t : prompt_registry()) {
    if (t.kind == kind) return t;
  }
  throw InternalError("prompt kind missing from registry");
}

inline const char* prompt_id(PromptKind kind) { return template_for(kind).id; }

inline PromptKind prompt_kind_from_id(const std::string& id) {
  for (const PromptTemplate& t : prompt_registry()) {
    if (id == t.id) return t.kind;
  }
  throw InputError("unknown prompt kind id: " + id);
}

inline bool is_likelihood_kind(PromptKind kind) {
  return template_for(kind).role == PromptRole::Likelihood;
}

using Slots = std::map<std::string, std::string>;

/// Fills every {name} hole in the template. Unused slots are permitted;
/// an unfilled hole raises MissingSlot naming it.
inline std::string render_prompt(PromptKind kind, const Slots& slots) {
  const std::string text = template_for(kind).text;
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find('{', pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    const std::size_t close = text.find('}', open + 1);
    if (close == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    out.append(text, pos, open - pos);
    const std::string name = text.substr(open + 1, close - open - 1);
    auto it = slots.find(name);
    if (it == slots.end()) {
      throw MissingSlot("template " + std::string(prompt_id(kind)) +
                        " requires slot '" + name + "'");
    }
    out += it->second;
    pos = close + 1;
  }
  return out;
}

/// Slot names appearing in the template, in order of first appearance.
inline std::vector<std::string> template_slots(PromptKind kind) {
  const std::string text = template_for(kind).text;
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = text.find('{', pos);
    if (open == std::string::npos) break;
    const std::size_t close = text.find('}', open + 1);
    if (close == std::string::npos) break;
    std::string name = text.substr(open + 1, close - open - 1);
    if (std::find(out.begin(), out.end(), name) == out.end()) {
      out.push_back(std::move(name));
    }
    pos = close + 1;
  }
  return out;
}

}  // namespace invplan
