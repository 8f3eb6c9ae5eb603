from trustshape.main import main

main()
