# Kreweras package
