#include "seqbench/history_factory.hpp"

namespace seqbench {

const std::string& db_preamble() {
  static const std::string text =
      "I will ask you a question, then you should help me operate a MySQL database with SQL to "
      "answer the question.\n"
      "You have to explain the problem and your solution to me and write down your thoughts.\n"
      "After thinking and explaining thoroughly, every round you can choose one of the two "
      "actions: Operation or Answer.\n"
      "\n"
      "To do operation, the format should be like this:\n"
      "Action: Operation\n"
      "```sql\n"
      "SELECT * FROM table WHERE condition;\n"
      "```\n"
      "You MUST put SQL in markdown format without any other comments. Your SQL should be in "
      "one line.\n"
      "I will use \"Action: Operation\" literally to match your SQL.\n"
      "Every time you can only execute one SQL statement. I will only execute the statement in "
      "the first SQL code block. Every time you write a SQL, I will execute it for you and give "
      "you the output.\n"
      "If the SQL is not executed successfully, the response will be the error message.\n"
      "Otherwise, the response will be the raw MySQL response.\n"
      "For SELECT queries, the response will be the result of the query, such as [(1, \"John "
      "Doe\", \"HR\"), (2, \"Jane Smith\", \"IT\"), ...], where each tuple represents a row and "
      "the elements are the values of the columns in the row.\n"
      "For SQL such as INSERT, UPDATE, and DELETE, the response will be an empty list [] "
      "indicating that the SQL was executed successfully.\n"
      "\n"
      "If you have obtain the answer by interacting with the database, and you MUST commit your "
      "final answer using the format like this:\n"
      "Action: Answer\n"
      "Final Answer: [(1, \"John Doe\", \"HR\"), (2, \"Jane Smith\", \"IT\"), ...]\n"
      "DO NOT write this pattern unless you are sure about your answer. I expect an accurate "
      "and correct answer.\n"
      "Your answer should be accurate. Your answer must be exactly the same as the correct "
      "answer.\n"
      "If the question is about modifying the database, then after done operation, your answer "
      "field can be anything.\n"
      "If the question is about querying the database, then after done operation, your answer "
      "field should be the result of the query.\n"
      "We note that the column names will not be displayed in the result, and you need to "
      "ensure both the orders of the columns and rows are correct.\n"
      "If your response cannot match any pattern I mentioned earlier, you will be judged as "
      "FAIL immediately.\n"
      "Once you commit your answer or the number of rounds reaches 3, the task will be finished "
      "and the system will judge whether you pass the task or not.\n"
      "\n"
      "Now, I will give you the question that you need to solve.";
  return text;
}

const std::string& os_preamble() {
  static const std::string text =
      "I will provide you with a task to perform on a Linux (Ubuntu) system. Your objective is "
      "to complete the task by executing the appropriate Bash commands.\n"
      "\n"
      "### Interaction Rules:\n"
      "1. **Thorough Analysis and Reasoning**:\n"
      "    - Before performing any action, carefully analyze the task and explain your thought "
      "process.\n"
      "    - Include a detailed explanation of the logic behind your choice of commands and "
      "approach.\n"
      "\n"
      "2. **Action Choices**:\n"
      "   - At the end of your reasoning, select **one and only one action** for each turn.\n"
      "     - **\"bash\"**: When you need to execute a command or perform an operation, provide "
      "the corresponding Bash code. Structure your response as:\n"
      "        Act: bash\n"
      "        ```bash\n"
      "        # Your Bash command(s) here\n"
      "        ```\n"
      "     - **\"finish\"**: When the task is complete and no further action is required, "
      "conclude with:\n"
      "        Act: finish\n"
      "\n"
      "3. **Other Guidelines**:\n"
      "    - I will use \"Act: bash\" and \"Act: finish\" literally to determine whether your "
      "action is to execute commands or conclude the task.\n"
      "    - Use the provided format accurately and consistently.\n"
      "    - Ensure all Bash commands are compatible with Linux (Ubuntu) systems.\n"
      "    - Avoid interactive operations (e.g., read, readline) in your Bash commands.\n"
      "\n"
      "4. **Task Completion**:\n"
      "    - The task will conclude either when you select the \"finish\" action or when the "
      "number of rounds reaches 5.\n"
      "    - The system will evaluate your performance to determine if the task was "
      "successfully completed.\n"
      "\n"
      "Now, I will give you the question that you need to solve.";
  return text;
}

const std::string& kg_preamble() {
  static const std::string text =
      "I will ask you a question that must be answered by querying a knowledge graph. You "
      "explore the graph step by step with a fixed set of actions and commit a final answer "
      "when you are sure.\n"
      "\n"
      "The available actions are:\n"
      "get_relations(x): returns all outgoing relations of the entity or variable x.\n"
      "get_neighbors(x, r): returns the entities reached from x via relation r, as a new "
      "variable.\n"
      "intersection(v1, v2): returns the intersection of two variables as a new variable.\n"
      "get_attributes(v): returns all numeric attributes defined on the entities in v.\n"
      "argmax(v, a): returns the entities of v with the maximum value of attribute a, as a new "
      "variable.\n"
      "argmin(v, a): returns the entities of v with the minimum value of attribute a, as a new "
      "variable.\n"
      "count(v): returns the number of entities in v.\n"
      "\n"
      "Each variable is named #0, #1, #2, ... in order of creation and can be used as an "
      "argument in later actions. Every round you reply with exactly one action call, written "
      "literally, for example: get_neighbors(m.0abc12, people.person.place_of_birth).\n"
      "I will execute the first well-formed action call in your reply and give you the result.\n"
      "\n"
      "When you are sure about the answer, commit it using the format:\n"
      "Final Answer: #k\n"
      "where #k is the variable holding the answer entities. If the question asks for a number, "
      "commit the number itself, for example: Final Answer: 3\n"
      "If your response cannot be matched to an action call or a final answer, you will be "
      "judged as FAIL immediately.\n"
      "Once you commit your answer or the number of rounds reaches 15, the task will be "
      "finished and the system will judge whether you pass the task or not.\n"
      "\n"
      "Now, I will give you the question that you need to solve.";
  return text;
}

ChatHistory HistoryItemFactory::construct(EnvKind env_kind, const std::string& instruction) {
  const std::string* preamble = nullptr;
  switch (env_kind) {
    case EnvKind::db: preamble = &db_preamble(); break;
    case EnvKind::os: preamble = &os_preamble(); break;
    case EnvKind::kg: preamble = &kg_preamble(); break;
  }
  ChatHistory history;
  std::string opening = *preamble;
  if (!suffix_.empty()) {
    opening += "\n";
    opening += suffix_;
  }
  history.add_user(std::move(opening));
  history.add_agent("OK.");
  history.add_user(instruction);
  return history;
}

}  // namespace seqbench
