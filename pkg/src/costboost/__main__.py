from costboost.cli import main

main()
