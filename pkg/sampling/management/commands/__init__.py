# Commandes de gestion du banc DEIS
