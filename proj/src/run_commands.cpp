int run_commands_placeholder;
