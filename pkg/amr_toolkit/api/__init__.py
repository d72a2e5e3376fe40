# Command controllers
